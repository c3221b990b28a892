#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace mcflash {

enum class Level : std::uint8_t { L0 = 0, L1 = 1, L2 = 2, L3 = 3 };

inline constexpr std::size_t kNumLevels = 4;

// One MLC cell level with its Gray-coded (LSB, MSB) pair.
struct CellState {
    Level level = Level::L0;
    std::uint8_t lsb = 1;
    std::uint8_t msb = 1;

    static constexpr CellState from_level(Level l) noexcept;
    static constexpr CellState from_bits(bool lsb, bool msb) noexcept;

    friend constexpr bool operator==(const CellState&, const CellState&) = default;
};

namespace detail {
// Index by level: L0=(1,1) L1=(1,0) L2=(0,0) L3=(0,1).
inline constexpr std::array<std::uint8_t, 4> kGrayLsb{1, 1, 0, 0};
inline constexpr std::array<std::uint8_t, 4> kGrayMsb{1, 0, 0, 1};
// Index by (lsb << 1) | msb.
inline constexpr std::array<Level, 4> kBitsToLevel{Level::L2, Level::L3, Level::L1, Level::L0};
}  // namespace detail

constexpr CellState CellState::from_level(Level l) noexcept {
    const auto i = static_cast<std::size_t>(l);
    return CellState{l, detail::kGrayLsb[i], detail::kGrayMsb[i]};
}

constexpr CellState CellState::from_bits(bool lsb, bool msb) noexcept {
    return from_level(detail::kBitsToLevel[(static_cast<unsigned>(lsb) << 1) | static_cast<unsigned>(msb)]);
}

constexpr Level level_from_bits(bool lsb, bool msb) noexcept {
    return detail::kBitsToLevel[(static_cast<unsigned>(lsb) << 1) | static_cast<unsigned>(msb)];
}

constexpr std::size_t index(Level l) noexcept { return static_cast<std::size_t>(l); }

std::string to_string(Level l);

struct StateDistribution {
    double mean = 0.0;
    double sigma = 1.0;

    // P(vth < x).
    double cdf(double x) const;
};

struct WearState {
    std::uint64_t pe_cycles = 0;
    double retention_hours = 0.0;

    friend bool operator==(const WearState&, const WearState&) = default;
};

// sigma(pe) = sigma0 * (1 + coeff * (pe / pe_scale)^exponent)
// shift(t)  = retention_shift * ln(1 + t / retention_timescale_hours)
// Programmed levels move down by shift(t); L0 moves up by its own coefficient.
struct WearModelParams {
    std::array<double, 4> sigma_coeff{};
    std::array<double, 4> sigma_exponent{1.0, 1.0, 1.0, 1.0};
    double pe_scale = 10000.0;
    std::array<double, 4> retention_shift{};
    double retention_timescale_hours = 1.0;

    void validate() const;
};

struct PhysicsParams {
    std::array<double, 4> mean0{};
    std::array<double, 4> sigma0{};
    double k_sigma = 3.5;
    double edge_k_sigma = 3.5;
    WearModelParams wear;

    void validate() const;
    std::array<StateDistribution, 4> fresh() const;
};

// Signed mean displacement after `hours` of retention (negative = downward).
double retention_mean_shift(Level level, double hours, const WearModelParams& wear);

StateDistribution distribution_params(Level level, const WearState& wear, const PhysicsParams& params);

std::array<StateDistribution, 4> distributions(const WearState& wear, const PhysicsParams& params);

double sample_vth(Level level, const WearState& wear, const PhysicsParams& params, std::mt19937_64& rng);

// Midpoint between the upper k-sigma edge of `lower` and the lower k-sigma
// edge of `upper`, on fresh distributions. Throws for non-adjacent levels.
double valley_midpoint(Level lower, Level upper, const PhysicsParams& params, double k_sigma);

// True when every adjacent pair keeps a gap between its ±k-sigma intervals.
bool windows_open(const std::array<StateDistribution, 4>& dists, double k_sigma);

}  // namespace mcflash
