#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mcflash/cell_physics.hpp"
#include "mcflash/nand_device.hpp"
#include "mcflash/reliability_lab.hpp"
#include "mcflash/ssd_model.hpp"

namespace mcflash {

struct SpeedupTargets {
    double osc = 0.0;
    double isc = 0.0;
    double parabit = 0.0;
    double flashcosmos = 0.0;
};

struct SegmentationParams {
    unsigned width = 800;
    unsigned height = 600;
    unsigned classes = 4;
    unsigned channels = 3;
    std::vector<double> scale_points;
    double scale_min = 10000;
    double scale_max = 200000;
    SpeedupTargets published;
};

struct EncryptionParams {
    unsigned width = 800;
    unsigned height = 600;
    unsigned bits_per_pixel = 24;
    std::vector<double> scale_points;
    double scale_min = 5000;
    double scale_max = 100000;
    SpeedupTargets published;
};

struct BitmapParams {
    double users = 8e8;
    unsigned days_per_month = 30;
    std::vector<double> scale_points;
    double scale_min = 1;
    double scale_max = 12;
    unsigned functional_slices = 2;
    unsigned functional_page_bytes = 1024;
    SpeedupTargets published;
};

struct WorkloadParams {
    SegmentationParams segmentation;
    EncryptionParams encryption;
    BitmapParams bitmap;
    unsigned functional_wordlines = 8;
    unsigned functional_page_bytes = 16384;
};

// All parameters of one experiment, one section per module.
struct SimConfig {
    PhysicsParams physics;
    DeviceParams device;
    CalibrationTargets calibration;
    SsdConfig ssd;
    EnergyModel energy;
    BaselineParams baselines;
    WorkloadParams workloads;

    void validate() const;
};

SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& c);

SimConfig load_config(const std::string& path);
void save_config(const SimConfig& c, const std::string& path);

// Parameters embedded from the shipped default configuration file.
const SimConfig& default_config();
const char* default_config_text();
const char* tool_version();

}  // namespace mcflash
