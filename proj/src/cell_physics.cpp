#include "mcflash/cell_physics.hpp"

#include <cmath>
#include <stdexcept>

#include "mcflash/errors.hpp"

namespace mcflash {

std::string to_string(Level l) { return "L" + std::to_string(index(l)); }

double StateDistribution::cdf(double x) const {
    return 0.5 * std::erfc(-(x - mean) / (sigma * std::sqrt(2.0)));
}

void WearModelParams::validate() const {
    for (std::size_t i = 0; i < kNumLevels; ++i) {
        if (!(sigma_coeff[i] >= 0.0) || !(sigma_exponent[i] > 0.0))
            throw ConfigError("wear: sigma growth coefficient must be >= 0 and exponent > 0");
        if (!(retention_shift[i] >= 0.0))
            throw ConfigError("wear: retention shift magnitudes must be >= 0");
    }
    if (!(pe_scale > 0.0) || !(retention_timescale_hours > 0.0))
        throw ConfigError("wear: pe_scale and retention timescale must be positive");
    if (!(retention_shift[3] > retention_shift[2] && retention_shift[2] > retention_shift[1]))
        throw ConfigError("wear: retention shift must satisfy |A3| > |A2| > |A1|");
}

void PhysicsParams::validate() const {
    for (std::size_t i = 0; i < kNumLevels; ++i)
        if (!(sigma0[i] > 0.0)) throw ConfigError("physics: sigma must be positive");
    for (std::size_t i = 1; i < kNumLevels; ++i) {
        if (!(mean0[i] > mean0[i - 1])) throw ConfigError("physics: fresh means must increase L0..L3");
        if (!(sigma0[0] > sigma0[i])) throw ConfigError("physics: erase distribution must be the widest");
    }
    if (!(k_sigma > 0.0) || !(edge_k_sigma > 0.0)) throw ConfigError("physics: k_sigma must be positive");
    wear.validate();
}

std::array<StateDistribution, 4> PhysicsParams::fresh() const {
    std::array<StateDistribution, 4> d{};
    for (std::size_t i = 0; i < kNumLevels; ++i) d[i] = {mean0[i], sigma0[i]};
    return d;
}

double retention_mean_shift(Level level, double hours, const WearModelParams& wear) {
    const std::size_t i = index(level);
    const double mag = wear.retention_shift[i] * std::log1p(hours / wear.retention_timescale_hours);
    return level == Level::L0 ? mag : -mag;
}

StateDistribution distribution_params(Level level, const WearState& wear, const PhysicsParams& params) {
    const std::size_t i = index(level);
    const auto& w = params.wear;
    const double x = static_cast<double>(wear.pe_cycles) / w.pe_scale;
    const double growth = wear.pe_cycles == 0 ? 0.0 : w.sigma_coeff[i] * std::pow(x, w.sigma_exponent[i]);
    return {params.mean0[i] + retention_mean_shift(level, wear.retention_hours, w), params.sigma0[i] * (1.0 + growth)};
}

std::array<StateDistribution, 4> distributions(const WearState& wear, const PhysicsParams& params) {
    std::array<StateDistribution, 4> d{};
    for (std::size_t i = 0; i < kNumLevels; ++i) d[i] = distribution_params(static_cast<Level>(i), wear, params);
    return d;
}

double sample_vth(Level level, const WearState& wear, const PhysicsParams& params, std::mt19937_64& rng) {
    const auto d = distribution_params(level, wear, params);
    std::normal_distribution<double> n(d.mean, d.sigma);
    return n(rng);
}

double valley_midpoint(Level lower, Level upper, const PhysicsParams& params, double k_sigma) {
    if (index(upper) != index(lower) + 1)
        throw std::invalid_argument("valley_midpoint: levels must be adjacent and ordered");
    const auto lo = index(lower), hi = index(upper);
    const double top = params.mean0[lo] + k_sigma * params.sigma0[lo];
    const double bottom = params.mean0[hi] - k_sigma * params.sigma0[hi];
    return 0.5 * (top + bottom);
}

bool windows_open(const std::array<StateDistribution, 4>& dists, double k_sigma) {
    for (std::size_t i = 0; i + 1 < kNumLevels; ++i) {
        const double top = dists[i].mean + k_sigma * dists[i].sigma;
        const double bottom = dists[i + 1].mean - k_sigma * dists[i + 1].sigma;
        if (!(top < bottom)) return false;
    }
    return true;
}

}  // namespace mcflash
