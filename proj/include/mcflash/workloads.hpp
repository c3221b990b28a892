#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcflash/config.hpp"
#include "mcflash/ssd_model.hpp"

namespace mcflash {

enum class WorkloadKind : std::uint8_t { Segmentation, Encryption, Bitmap };

std::string to_string(WorkloadKind k);
WorkloadKind parse_workload(const std::string& name);

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::Segmentation;
    double scale = 0.0;  // images, or months for bitmap
    std::optional<unsigned> days_override;  // bitmap: query this many days instead of months
    bool functional_check = true;
    std::uint64_t seed = 1;
};

// Paradigm keys used in results: osc, isc, parabit, flashcosmos, mcflash.
inline const std::vector<std::string> kResultParadigms{"osc", "isc", "parabit", "flashcosmos", "mcflash"};
inline const std::vector<std::string> kBaselineKeys{"osc", "isc", "parabit", "flashcosmos"};

struct WorkloadResult {
    WorkloadKind kind = WorkloadKind::Segmentation;
    double scale = 0.0;
    unsigned operands = 0;  // per result stripe
    ChainShape mcflash_shape;
    double stripes = 0.0;   // result stripes (one page per plane each)
    std::map<std::string, double> total_us;
    std::map<std::string, double> speedup;  // total_us(X) / total_us(mcflash)
    bool functional_checked = false;
    std::uint64_t bits_checked = 0;
    std::uint64_t mismatches = 0;
    bool baselines_calibrated = true;
};

WorkloadResult run_segmentation(const WorkloadSpec& spec, const SimConfig& cfg);
WorkloadResult run_encryption(const WorkloadSpec& spec, const SimConfig& cfg);
WorkloadResult run_bitmap_index(const WorkloadSpec& spec, const SimConfig& cfg);
WorkloadResult run_workload(const WorkloadSpec& spec, const SimConfig& cfg);

struct SweepSummary {
    WorkloadKind kind = WorkloadKind::Segmentation;
    std::vector<WorkloadResult> points;
    std::map<std::string, double> mean_speedup;  // arithmetic mean over points
    std::uint64_t mismatches = 0;
};

std::vector<double> default_scale_points(WorkloadKind kind, const SimConfig& cfg);
SweepSummary run_sweep(WorkloadKind kind, const std::vector<double>& points, const SimConfig& cfg,
                       bool functional_check, std::uint64_t seed);

const SpeedupTargets& published_speedups(WorkloadKind kind, const SimConfig& cfg);

struct BaselineFit {
    BaselineParams params;
    // Mean speedups of the fitted baselines per workload, keyed "parabit"/"flashcosmos".
    std::map<WorkloadKind, std::map<std::string, double>> fitted_speedup;
    double parabit_objective = 0.0;
    double flashcosmos_objective = 0.0;
};

// Fits parabit.realloc_us, flashcosmos.mws_us and flashcosmos.xor_us (one
// global set shared by all workloads) to the published average speedups by
// least squares in log space. parabit.op_us is held at its configured value.
BaselineFit calibrate_baselines(const SimConfig& cfg);

}  // namespace mcflash
