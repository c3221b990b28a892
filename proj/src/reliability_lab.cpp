#include "mcflash/reliability_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mcflash/errors.hpp"

namespace mcflash {

namespace {

void finish(RberReport& r) {
    r.rber_percent = r.bits_compared == 0 ? 0.0 : 100.0 * static_cast<double>(r.mismatches) / r.bits_compared;
    const bool worn = r.wear.pe_cycles > 0 || r.wear.retention_hours > 0.0;
    if (r.mismatches == 0 && worn && r.bits_compared > 0)
        r.upper_bound_percent = 300.0 / static_cast<double>(r.bits_compared);
    else
        r.upper_bound_percent.reset();
}

bool uses_reference(const OffsetPlan& plan, SweepTarget t) {
    switch (plan.read_kind) {
        case ReadKind::Lsb: return t.vref == 1 && !t.minus_cfg;
        case ReadKind::Msb: return t.vref != 1 && !t.minus_cfg;
        case ReadKind::Sbr: return t.vref != 1;
    }
    return false;
}

}  // namespace

RberReport merge(const RberReport& a, const RberReport& b) {
    if (!(a.op == b.op)) throw std::invalid_argument("merge: reports for different opcodes");
    RberReport r = a;
    r.trials += b.trials;
    r.pages_tested += b.pages_tested;
    r.bits_compared += b.bits_compared;
    r.mismatches += b.mismatches;
    r.degraded = a.degraded || b.degraded;
    finish(r);
    return r;
}

std::vector<WordlineAddr> free_wordlines(const NandDevice& dev, std::size_t n) {
    std::vector<WordlineAddr> out;
    const auto& g = dev.geometry();
    for (std::uint32_t b = 0; b < g.blocks_per_plane && out.size() < n; ++b)
        for (std::uint32_t w = 0; w < g.wordlines_per_block && out.size() < n; ++w)
            if (dev.is_writable({b, w}) && !dev.has_staged({b, w})) out.push_back({b, w});
    if (out.size() < n)
        throw CapacityError("device has " + std::to_string(out.size()) + " erased wordlines, " + std::to_string(n) +
                            " requested");
    return out;
}

PreparedPages prepare_pages(NandDevice& dev, OpCode op, std::size_t pages, std::mt19937_64& rng) {
    PreparedPages p{op, free_wordlines(dev, pages), {}};
    p.expected.reserve(pages);
    const std::size_t bits = dev.page_bits();
    for (const auto& wl : p.wordlines) {
        const BitVector a = BitVector::random(bits, rng);
        const BitVector b = BitVector::random(bits, rng);
        if (op.unary()) {
            write_unary_operand(dev, wl, b);
        } else {
            write_operands(dev, wl, a, b);
        }
        p.expected.push_back(host_apply(op.kind, a, b));
    }
    return p;
}

RberReport evaluate_pages(NandDevice& dev, const Engine& engine, const PreparedPages& prepared,
                          const MismatchSink& sink) {
    RberReport r;
    r.op = prepared.op;
    if (!prepared.wordlines.empty()) r.wear = dev.block_meta(prepared.wordlines.front().block).wear;
    for (std::size_t i = 0; i < prepared.wordlines.size(); ++i) {
        const auto res = engine.execute(dev, prepared.wordlines[i], prepared.op);
        const BitVector diff = res.bits ^ prepared.expected[i];
        r.mismatches += diff.count();
        r.bits_compared += diff.size();
        r.trials += 1;
        r.pages_tested += 1;
        r.degraded = r.degraded || res.degraded;
        if (sink) sink(diff);
    }
    finish(r);
    return r;
}

RberReport measure_rber(NandDevice& dev, const Engine& engine, OpCode op, std::size_t pages, std::mt19937_64& rng,
                        const MismatchSink& sink) {
    const auto prepared = prepare_pages(dev, op, pages, rng);
    return evaluate_pages(dev, engine, prepared, sink);
}

std::string SweepTarget::name() const { return "vref" + std::to_string(vref) + (minus_cfg ? "-minus" : ""); }

SweepTarget SweepTarget::parse(const std::string& s) {
    SweepTarget t;
    std::string body = s;
    if (body.size() > 6 && body.compare(body.size() - 6, 6, "-minus") == 0) {
        t.minus_cfg = true;
        body.resize(body.size() - 6);
    }
    if (body.size() != 5 || body.compare(0, 4, "vref") != 0 || body[4] < '0' || body[4] > '2')
        throw std::invalid_argument("unknown reference: " + s + " (expected vref0..vref2[-minus])");
    t.vref = static_cast<std::size_t>(body[4] - '0');
    return t;
}

std::optional<std::pair<int, int>> find_zero_window(const std::vector<int>& offsets,
                                                    const std::vector<std::uint64_t>& mismatches) {
    std::optional<std::pair<int, int>> best;
    std::size_t best_len = 0, run_start = 0, run_len = 0;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (mismatches[i] == 0) {
            if (run_len == 0) run_start = i;
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best = std::make_pair(offsets[run_start], offsets[i]);
            }
        } else {
            run_len = 0;
        }
    }
    return best;
}

SweepCurve sweep_offset(NandDevice& dev, const Engine& engine, OpCode op, SweepTarget target, int lo, int hi,
                        int stride, std::size_t pages_per_point, std::mt19937_64& rng) {
    const OffsetPlan base = engine.plan(op);
    if (target.vref > 2 || !uses_reference(base, target))
        throw std::invalid_argument("reference " + target.name() + " is not used by the " + op.name() + " plan");
    if (stride < 1 || lo > hi) throw std::invalid_argument("sweep range must satisfy lo <= hi and stride >= 1");
    if (lo < base.cfg.min_offset() || hi > base.cfg.max_offset())
        throw RangeError("sweep range exceeds the offset register range");

    const auto prepared = prepare_pages(dev, op, pages_per_point, rng);
    SweepCurve c;
    c.op = op;
    c.target = target;
    if (!prepared.wordlines.empty()) c.wear = dev.block_meta(prepared.wordlines.front().block).wear;
    c.bits_per_point = pages_per_point * dev.page_bits();
    for (int off = lo; off <= hi; off += stride) {
        OffsetPlan p = base;
        (target.minus_cfg ? p.cfg_minus : p.cfg).offset[target.vref] = off;
        std::uint64_t miss = 0;
        for (std::size_t i = 0; i < prepared.wordlines.size(); ++i)
            miss += hamming(execute_plan(dev, prepared.wordlines[i], p).bits, prepared.expected[i]);
        c.offset_steps.push_back(off);
        c.mismatches.push_back(miss);
        c.rber_percent.push_back(c.bits_per_point == 0 ? 0.0 : 100.0 * static_cast<double>(miss) / c.bits_per_point);
    }
    c.zero_window = find_zero_window(c.offset_steps, c.mismatches);
    return c;
}

void cycle_block(NandDevice& dev, std::uint32_t block, std::uint64_t n) { dev.stress_cycles(block, n); }

void retention_bake(NandDevice& dev, std::uint32_t block, double hours) { dev.bake(block, hours); }

namespace {

bool decode_msb(double v, double r0, double r2) { return v < r0 || v >= r2; }

bool decode(const OffsetPlan& plan, const std::array<double, 3>& refs, double v) {
    auto ref = [&](const ReadRefConfig& c, std::size_t i) { return refs[i] + c.offset[i] * c.dac_step; };
    bool bit = false;
    switch (plan.read_kind) {
        case ReadKind::Lsb: bit = v < ref(plan.cfg, 1); break;
        case ReadKind::Msb: bit = decode_msb(v, ref(plan.cfg, 0), ref(plan.cfg, 2)); break;
        case ReadKind::Sbr:
            bit = decode_msb(v, ref(plan.cfg, 0), ref(plan.cfg, 2)) ==
                  decode_msb(v, ref(plan.cfg_minus, 0), ref(plan.cfg_minus, 2));
            break;
    }
    return plan.inverse ? !bit : bit;
}

}  // namespace

double expected_rber(const OffsetPlan& plan, const std::array<StateDistribution, 4>& dists,
                     const std::array<double, 3>& default_refs) {
    std::vector<double> cuts;
    auto add = [&](const ReadRefConfig& c) {
        for (std::size_t i = 0; i < 3; ++i) cuts.push_back(default_refs[i] + c.offset[i] * c.dac_step);
    };
    add(plan.cfg);
    if (plan.read_kind == ReadKind::Sbr) add(plan.cfg_minus);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const bool unary = plan.op.unary();
    const std::size_t first = unary ? 2 : 0;
    const double weight = unary ? 0.5 : 0.25;
    double total = 0.0;
    for (std::size_t s = first; s < kNumLevels; ++s) {
        const auto cs = CellState::from_level(static_cast<Level>(s));
        const bool want = host_eval(plan.op.kind, cs.lsb != 0, cs.msb != 0);
        const auto& d = dists[s];
        double wrong = 0.0;
        // Interval [cuts[k-1], cuts[k]) decodes like its left end (ties go up).
        for (std::size_t k = 0; k <= cuts.size(); ++k) {
            const double left = k == 0 ? -std::numeric_limits<double>::infinity() : cuts[k - 1];
            const double right = k == cuts.size() ? std::numeric_limits<double>::infinity() : cuts[k];
            const double probe = k == 0 ? cuts.front() - 1.0 : left;
            if (decode(plan, default_refs, probe) != want) wrong += d.cdf(right) - d.cdf(left);
        }
        total += weight * wrong;
    }
    return total;
}

void CalibrationTargets::validate() const {
    if (targets.empty()) throw std::invalid_argument("calibration: no targets");
    for (const auto& t : targets) {
        if (!(t.target_percent > 0.0) || !(t.band_lo_percent > 0.0) || !(t.band_lo_percent <= t.target_percent) ||
            !(t.target_percent <= t.band_hi_percent))
            throw std::invalid_argument("calibration: target for " + t.op.name() + " must satisfy 0 < lo <= target <= hi");
        if (t.band_lo_percent * band_margin > t.band_hi_percent / band_margin)
            throw std::invalid_argument("calibration: band for " + t.op.name() + " is narrower than the margin");
    }
    if (!(band_margin >= 1.0) || !(sigma_exponent > 0.0) || !(coeff_min > 0.0) || !(coeff_max > coeff_min))
        throw std::invalid_argument("calibration: bad search settings");
    if (heavy_pe_cycles <= pe_cycles) throw std::invalid_argument("calibration: heavy point must exceed target point");
}

CalibrationResult calibrate(const CalibrationTargets& targets, const PhysicsParams& physics,
                            const DeviceParams& device) {
    targets.validate();
    const Engine engine(physics, device);
    CalibrationResult result;

    // Fresh geometry does not depend on the wear coefficients.
    const auto fresh = physics.fresh();
    for (auto kind : {OpKind::And, OpKind::Or, OpKind::Xnor, OpKind::Not}) {
        const double m = expected_rber(engine.plan(OpCode(kind)), fresh, device.default_refs) * targets.fresh_bits;
        result.fresh_expected_mismatches.push_back(m);
        if (m > targets.fresh_max_expected_mismatches) {
            std::ostringstream os;
            os << "calibration infeasible: fresh " << OpCode(kind).name() << " expects " << m
               << " mismatches, limit " << targets.fresh_max_expected_mismatches;
            throw CalibrationError(os.str());
        }
    }

    PhysicsParams trial = physics;
    trial.wear.sigma_exponent.fill(targets.sigma_exponent);
    const WearState point{targets.pe_cycles, targets.retention_hours};

    auto model = [&](const std::array<double, 4>& u, std::vector<double>* out) {
        for (std::size_t s = 0; s < kNumLevels; ++s) trial.wear.sigma_coeff[s] = std::exp(u[s]);
        const auto d = distributions(point, trial);
        double obj = 0.0;
        for (const auto& t : targets.targets) {
            const double pct = 100.0 * expected_rber(engine.plan(t.op), d, device.default_refs);
            if (out) out->push_back(pct);
            const double lp = std::log(std::max(pct, 1e-30));
            const double lo = std::log(t.band_lo_percent * targets.band_margin);
            const double hi = std::log(t.band_hi_percent / targets.band_margin);
            // A target on the band edge is pulled inside the shrunk band.
            obj += std::pow(lp - std::clamp(std::log(t.target_percent), lo, hi), 2);
            if (lp < lo) obj += 1e4 * std::pow(lo - lp, 2);
            if (lp > hi) obj += 1e4 * std::pow(lp - hi, 2);
        }
        return obj;
    };

    const double umin = std::log(targets.coeff_min), umax = std::log(targets.coeff_max);
    std::array<double, 4> u{};
    double best = model(u, nullptr);
    for (double step = 1.0; step > 1e-7; step *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t s = 0; s < kNumLevels; ++s) {
                for (double dir : {1.0, -1.0}) {
                    auto cand = u;
                    cand[s] = std::clamp(cand[s] + dir * step, umin, umax);
                    const double f = model(cand, nullptr);
                    if (f < best - 1e-15) {
                        best = f;
                        u = cand;
                        improved = true;
                    }
                }
            }
        }
    }

    model(u, &result.fitted_percent);
    result.wear = trial.wear;
    result.objective = best;

    for (std::size_t i = 0; i < targets.targets.size(); ++i) {
        const auto& t = targets.targets[i];
        const double pct = result.fitted_percent[i];
        // The shrunk band only steers the fit; the published band is the hard limit.
        if (pct < t.band_lo_percent || pct > t.band_hi_percent) {
            std::ostringstream os;
            os << "calibration infeasible: " << t.op.name() << " fits " << pct << "% outside the band ["
               << t.band_lo_percent << ", " << t.band_hi_percent << "]%";
            throw CalibrationError(os.str());
        }
    }
    result.heavy_window_closed = !windows_open(distributions({targets.heavy_pe_cycles, 0.0}, trial), physics.k_sigma);
    if (!result.heavy_window_closed)
        throw CalibrationError("calibration infeasible: zero window still open at the heavy-wear point");
    return result;
}

}  // namespace mcflash
