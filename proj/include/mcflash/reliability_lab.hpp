#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mcflash/mcflash_engine.hpp"
#include "mcflash/nand_device.hpp"

namespace mcflash {

struct RberReport {
    OpCode op;
    WearState wear;
    std::uint64_t trials = 0;
    std::uint64_t pages_tested = 0;
    std::uint64_t bits_compared = 0;
    std::uint64_t mismatches = 0;
    double rber_percent = 0.0;
    // Rule-of-three bound, reported when a worn run sees no mismatch.
    std::optional<double> upper_bound_percent;
    bool degraded = false;
};

RberReport merge(const RberReport& a, const RberReport& b);

// Pages written with random operands and their oracle results, awaiting
// evaluation (possibly after a bake).
struct PreparedPages {
    OpCode op;
    std::vector<WordlineAddr> wordlines;
    std::vector<BitVector> expected;
};

// Erased wordlines in address order; throws CapacityError if fewer than n.
std::vector<WordlineAddr> free_wordlines(const NandDevice& dev, std::size_t n);

PreparedPages prepare_pages(NandDevice& dev, OpCode op, std::size_t pages, std::mt19937_64& rng);

// Receives the XOR of result and oracle for each evaluated page.
using MismatchSink = std::function<void(const BitVector& diff)>;

RberReport evaluate_pages(NandDevice& dev, const Engine& engine, const PreparedPages& prepared,
                          const MismatchSink& sink = {});

RberReport measure_rber(NandDevice& dev, const Engine& engine, OpCode op, std::size_t pages, std::mt19937_64& rng,
                        const MismatchSink& sink = {});

struct SweepTarget {
    std::size_t vref = 0;
    bool minus_cfg = false;  // SBR: sweep the cfg_minus register instead of cfg_plus

    std::string name() const;
    static SweepTarget parse(const std::string& s);  // "vref0", "vref2-minus", ...
};

struct SweepCurve {
    OpCode op;
    SweepTarget target;
    WearState wear;
    std::vector<int> offset_steps;
    std::vector<double> rber_percent;
    std::vector<std::uint64_t> mismatches;
    std::uint64_t bits_per_point = 0;
    std::optional<std::pair<int, int>> zero_window;

    int window_width() const noexcept { return zero_window ? zero_window->second - zero_window->first + 1 : 0; }
};

// Longest contiguous run of zero-mismatch points, as (low, high) offsets.
std::optional<std::pair<int, int>> find_zero_window(const std::vector<int>& offsets,
                                                    const std::vector<std::uint64_t>& mismatches);

SweepCurve sweep_offset(NandDevice& dev, const Engine& engine, OpCode op, SweepTarget target, int lo, int hi,
                        int stride, std::size_t pages_per_point, std::mt19937_64& rng);

void cycle_block(NandDevice& dev, std::uint32_t block, std::uint64_t n);
void retention_bake(NandDevice& dev, std::uint32_t block, double hours);

// Closed-form expected RBER (fraction) of a plan over uniform random
// operands, integrating Gaussian mass over misdecoded intervals.
double expected_rber(const OffsetPlan& plan, const std::array<StateDistribution, 4>& dists,
                     const std::array<double, 3>& default_refs);

struct RberTarget {
    OpCode op;
    double target_percent = 0.0;
    double band_lo_percent = 0.0;
    double band_hi_percent = 0.0;
};

struct CalibrationTargets {
    std::uint64_t pe_cycles = 1500;
    double retention_hours = 0.0;
    std::uint64_t heavy_pe_cycles = 10000;
    std::vector<RberTarget> targets;
    // Fitted values must sit inside each band shrunk by this factor at both ends.
    double band_margin = 1.15;
    double sigma_exponent = 0.7;
    double coeff_min = 1e-3;
    double coeff_max = 100.0;
    // Fresh constraint: expected mismatches over this many bits must stay below the limit.
    double fresh_bits = 1000.0 * 131072.0;
    double fresh_max_expected_mismatches = 0.01;

    void validate() const;
};

struct CalibrationResult {
    WearModelParams wear;
    double objective = 0.0;
    std::vector<double> fitted_percent;  // per target, analytic at the calibration point
    std::vector<double> fresh_expected_mismatches;
    bool heavy_window_closed = false;
};

CalibrationResult calibrate(const CalibrationTargets& targets, const PhysicsParams& physics,
                            const DeviceParams& device);

}  // namespace mcflash
