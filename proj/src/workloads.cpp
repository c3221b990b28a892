#include "mcflash/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "mcflash/errors.hpp"
#include "mcflash/mcflash_engine.hpp"
#include "mcflash/nand_device.hpp"

namespace mcflash {

std::string to_string(WorkloadKind k) {
    switch (k) {
        case WorkloadKind::Segmentation: return "segmentation";
        case WorkloadKind::Encryption: return "encryption";
        case WorkloadKind::Bitmap: return "bitmap";
    }
    return "?";
}

WorkloadKind parse_workload(const std::string& name) {
    for (auto k : {WorkloadKind::Segmentation, WorkloadKind::Encryption, WorkloadKind::Bitmap})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown workload: " + name);
}

const SpeedupTargets& published_speedups(WorkloadKind kind, const SimConfig& cfg) {
    switch (kind) {
        case WorkloadKind::Segmentation: return cfg.workloads.segmentation.published;
        case WorkloadKind::Encryption: return cfg.workloads.encryption.published;
        case WorkloadKind::Bitmap: return cfg.workloads.bitmap.published;
    }
    throw std::invalid_argument("unknown workload");
}

namespace {

void check_scale(double scale, double lo, double hi, const char* what) {
    if (!(scale >= lo && scale <= hi))
        throw RangeError(std::string(what) + " scale " + std::to_string(scale) + " outside [" + std::to_string(lo) +
                         ", " + std::to_string(hi) + "]");
}

double stripe_bytes(const SsdConfig& ssd) { return static_cast<double>(ssd.total_planes()) * ssd.page_bytes(); }

bool has_parabit(const BaselineParams& b) { return b.parabit.op_us && b.parabit.realloc_us; }
bool has_flashcosmos(const BaselineParams& b, const OpCode& op) {
    const bool x = op.kind == OpKind::Xor || op.kind == OpKind::Xnor;
    return x ? b.flashcosmos.xor_us.has_value() : b.flashcosmos.mws_us.has_value();
}

// Per-stripe timelines of every paradigm scaled to the whole workload.
void project(WorkloadResult& r, const SimConfig& cfg, OpCode op) {
    const auto& ssd = cfg.ssd;
    const ChainShape plain{r.operands, op, r.operands - 1, 0};
    r.total_us["osc"] = r.stripes * chain_timeline(Paradigm::Osc, ssd, plain).total_us;
    r.total_us["isc"] = r.stripes * chain_timeline(Paradigm::Isc, ssd, plain).total_us;
    const Paradigm mc = r.mcflash_shape.nonaligned_ops > 0 ? Paradigm::IfcNonAligned : Paradigm::IfcAligned;
    r.total_us["mcflash"] = r.stripes * chain_timeline(mc, ssd, r.mcflash_shape).total_us;
    r.baselines_calibrated = true;
    if (has_parabit(cfg.baselines))
        r.total_us["parabit"] = r.stripes * chain_timeline(Paradigm::ParaBit, ssd, plain, &cfg.baselines).total_us;
    else
        r.baselines_calibrated = false;
    if (has_flashcosmos(cfg.baselines, op))
        r.total_us["flashcosmos"] =
            r.stripes * chain_timeline(Paradigm::FlashCosmos, ssd, plain, &cfg.baselines).total_us;
    else
        r.baselines_calibrated = false;
    for (const auto& key : kBaselineKeys) {
        auto it = r.total_us.find(key);
        if (it != r.total_us.end()) r.speedup[key] = it->second / r.total_us["mcflash"];
    }
}

std::mt19937_64 stream(std::uint64_t seed, double scale, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(std::llround(scale)), static_cast<std::uint32_t>(salt)};
    return std::mt19937_64(seq);
}

DeviceParams functional_device(const SimConfig& cfg, std::uint32_t wordlines, std::uint32_t page_bytes) {
    DeviceParams d = cfg.device;
    d.geometry.blocks_per_plane = 1;
    d.geometry.wordlines_per_block = wordlines;
    d.geometry.page_size_bytes = page_bytes;
    return d;
}

// Bitplane of pixels whose channel value falls in class c's band.
BitVector class_mask(const std::vector<std::uint8_t>& channel, unsigned c, unsigned classes) {
    BitVector m(channel.size());
    const unsigned width = 256 / classes;
    for (std::size_t i = 0; i < channel.size(); ++i) m.set(i, channel[i] / width == c);
    return m;
}

}  // namespace

WorkloadResult run_segmentation(const WorkloadSpec& spec, const SimConfig& cfg) {
    if (spec.kind != WorkloadKind::Segmentation) throw std::invalid_argument("spec is not a segmentation workload");
    const auto& p = cfg.workloads.segmentation;
    check_scale(spec.scale, p.scale_min, p.scale_max, "segmentation");
    WorkloadResult r;
    r.kind = spec.kind;
    r.scale = spec.scale;
    r.operands = p.channels;
    const OpCode op(OpKind::And);
    r.mcflash_shape = ChainShape{p.channels, op, p.channels - 1, 0};
    const double result_bytes = spec.scale * p.width * p.height * p.classes / 8.0;
    r.stripes = result_bytes / stripe_bytes(cfg.ssd);
    project(r, cfg, op);

    if (spec.functional_check) {
        // One class bitplane per sampled wordline; channel masks are pre-aligned.
        const unsigned n = cfg.workloads.functional_wordlines;
        NandDevice dev(functional_device(cfg, n * (p.channels - 1), cfg.workloads.functional_page_bytes), cfg.physics,
                       spec.seed);
        const Engine engine(cfg.physics, dev.params());
        auto rng = stream(spec.seed, spec.scale, 0x5E6);
        std::uniform_int_distribution<int> byte(0, 255);
        std::uint32_t next = 0;
        for (unsigned s = 0; s < n; ++s) {
            const unsigned cls = s % p.classes;
            std::vector<BitVector> masks;
            for (unsigned ch = 0; ch < p.channels; ++ch) {
                std::vector<std::uint8_t> plane(dev.page_bits());
                for (auto& v : plane) v = static_cast<std::uint8_t>(byte(rng));
                masks.push_back(class_mask(plane, cls, p.classes));
            }
            BitVector acc = masks[0];
            BitVector oracle = masks[0];
            for (unsigned ch = 1; ch < p.channels; ++ch) {
                const WordlineAddr wl{0, next++};
                write_operands(dev, wl, acc, masks[ch]);
                acc = engine.execute(dev, wl, op).bits;
                oracle &= masks[ch];
            }
            r.mismatches += hamming(acc, oracle);
            r.bits_checked += oracle.size();
        }
        r.functional_checked = true;
    }
    return r;
}

WorkloadResult run_encryption(const WorkloadSpec& spec, const SimConfig& cfg) {
    if (spec.kind != WorkloadKind::Encryption) throw std::invalid_argument("spec is not an encryption workload");
    const auto& p = cfg.workloads.encryption;
    check_scale(spec.scale, p.scale_min, p.scale_max, "encryption");
    WorkloadResult r;
    r.kind = spec.kind;
    r.scale = spec.scale;
    r.operands = 2;
    const OpCode op(OpKind::Xor, true);
    r.mcflash_shape = ChainShape{2, op, 1, 0};
    const double image_bytes = spec.scale * p.width * p.height * p.bits_per_pixel / 8.0;
    r.stripes = image_bytes / stripe_bytes(cfg.ssd);
    project(r, cfg, op);

    if (spec.functional_check) {
        const unsigned n = cfg.workloads.functional_wordlines;
        NandDevice dev(functional_device(cfg, 2 * n, cfg.workloads.functional_page_bytes), cfg.physics, spec.seed);
        const Engine engine(cfg.physics, dev.params());
        auto rng = stream(spec.seed, spec.scale, 0xE4C);
        for (unsigned s = 0; s < n; ++s) {
            const BitVector image = BitVector::random(dev.page_bits(), rng);
            const BitVector key = BitVector::random(dev.page_bits(), rng);
            const WordlineAddr enc{0, 2 * s}, dec{0, 2 * s + 1};
            write_operands(dev, enc, image, key);
            const BitVector cipher = engine.execute(dev, enc, op).bits;
            write_operands(dev, dec, cipher, key);
            const BitVector plain = engine.execute(dev, dec, op).bits;
            r.mismatches += hamming(cipher, image ^ key) + hamming(plain, image);
            r.bits_checked += 2 * image.size();
        }
        r.functional_checked = true;
    }
    return r;
}

WorkloadResult run_bitmap_index(const WorkloadSpec& spec, const SimConfig& cfg) {
    if (spec.kind != WorkloadKind::Bitmap) throw std::invalid_argument("spec is not a bitmap workload");
    const auto& p = cfg.workloads.bitmap;
    unsigned days = 0;
    if (spec.days_override) {
        days = *spec.days_override;
        if (days == 0) throw RangeError("bitmap query needs at least one day");
    } else {
        check_scale(spec.scale, p.scale_min, p.scale_max, "bitmap");
        days = static_cast<unsigned>(std::llround(spec.scale * p.days_per_month));
    }
    WorkloadResult r;
    r.kind = spec.kind;
    r.scale = spec.scale;
    r.operands = days;
    const OpCode op(OpKind::And);
    // The first pair is co-resident; every later operand meets the running
    // result on a freshly aligned wordline.
    r.mcflash_shape = days >= 2 ? ChainShape{days, op, 1, days - 2} : ChainShape{1, op, 0, 0};
    r.stripes = (p.users / 8.0) / stripe_bytes(cfg.ssd);
    project(r, cfg, op);

    if (spec.functional_check) {
        for (unsigned slice = 0; slice < p.functional_slices; ++slice) {
            // Layout: wl 0 holds days 0/1, wl d-1 holds day d (d >= 2), then one
            // aligned wordline per chained AND.
            const std::uint32_t wordlines = std::max(1u, 2 * days);
            NandDevice dev(functional_device(cfg, wordlines, p.functional_page_bytes), cfg.physics,
                           spec.seed + slice);
            const Engine engine(cfg.physics, dev.params());
            auto rng = stream(spec.seed, spec.scale, 0xB17 + slice);
            std::bernoulli_distribution active(0.995);
            auto day_vector = [&] {
                BitVector v(dev.page_bits());
                for (std::size_t i = 0; i < v.size(); ++i) v.set(i, active(rng));
                return v;
            };
            const BitVector ones(dev.page_bits(), true);
            std::vector<BitVector> day(days);
            for (auto& v : day) v = day_vector();

            BitVector oracle = day[0];
            for (unsigned d = 1; d < days; ++d) oracle &= day[d];

            BitVector result;
            if (days == 1) {
                write_operands(dev, {0, 0}, day[0], ones);
                result = dev.read_page({0, 0}, PageKind::Lsb, dev.params().default_config());
            } else {
                write_operands(dev, {0, 0}, day[0], day[1]);
                for (unsigned d = 2; d < days; ++d) write_operands(dev, {0, d - 1}, day[d], ones);
                result = engine.execute(dev, {0, 0}, op).bits;
                std::uint32_t next = days - 1;
                for (unsigned d = 2; d < days; ++d) {
                    const WordlineAddr dst{0, next++};
                    dev.stage_buffer({dst, PageKind::Lsb}, result);
                    dev.copyback({{0, d - 1}, PageKind::Lsb}, {dst, PageKind::Msb});
                    result = engine.execute(dev, dst, op).bits;
                }
            }
            r.mismatches += hamming(result, oracle);
            r.bits_checked += oracle.size();
        }
        r.functional_checked = true;
    }
    return r;
}

WorkloadResult run_workload(const WorkloadSpec& spec, const SimConfig& cfg) {
    switch (spec.kind) {
        case WorkloadKind::Segmentation: return run_segmentation(spec, cfg);
        case WorkloadKind::Encryption: return run_encryption(spec, cfg);
        case WorkloadKind::Bitmap: return run_bitmap_index(spec, cfg);
    }
    throw std::invalid_argument("unknown workload");
}

std::vector<double> default_scale_points(WorkloadKind kind, const SimConfig& cfg) {
    switch (kind) {
        case WorkloadKind::Segmentation: return cfg.workloads.segmentation.scale_points;
        case WorkloadKind::Encryption: return cfg.workloads.encryption.scale_points;
        case WorkloadKind::Bitmap: return cfg.workloads.bitmap.scale_points;
    }
    return {};
}

SweepSummary run_sweep(WorkloadKind kind, const std::vector<double>& points, const SimConfig& cfg,
                       bool functional_check, std::uint64_t seed) {
    if (points.empty()) throw std::invalid_argument("workload sweep needs at least one scale point");
    SweepSummary s;
    s.kind = kind;
    for (double x : points) {
        WorkloadSpec spec{kind, x, std::nullopt, functional_check, seed};
        s.points.push_back(run_workload(spec, cfg));
        s.mismatches += s.points.back().mismatches;
    }
    for (const auto& key : kBaselineKeys) {
        double sum = 0.0;
        bool all = true;
        for (const auto& r : s.points) {
            auto it = r.speedup.find(key);
            if (it == r.speedup.end()) {
                all = false;
                break;
            }
            sum += it->second;
        }
        if (all) s.mean_speedup[key] = sum / static_cast<double>(s.points.size());
    }
    return s;
}

namespace {

// Minimizes f over x >= lo: log-spaced scan, then golden-section refinement
// around the best bracket.
double minimize_from(const std::function<double(double)>& f, double lo) {
    std::vector<double> xs{lo};
    for (int k = -200; k <= 600; ++k)
        if (const double x = std::pow(10.0, k / 100.0); x > lo) xs.push_back(x);
    std::size_t best = 0;
    double fbest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = f(xs[i]);
        if (v < fbest) {
            fbest = v;
            best = i;
        }
    }
    double a = xs[best == 0 ? 0 : best - 1];
    double b = xs[std::min(best + 1, xs.size() - 1)];
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-9 * std::max(1.0, b); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return f(x) <= fbest ? x : xs[best];
}

double log_error(double model, double target) { return std::pow(std::log(model / target), 2); }

}  // namespace

BaselineFit calibrate_baselines(const SimConfig& cfg) {
    if (!cfg.baselines.parabit.op_us) throw std::invalid_argument("missing baseline parameter: parabit.op_us");
    SimConfig work = cfg;
    std::map<WorkloadKind, std::vector<double>> points;
    for (auto k : {WorkloadKind::Segmentation, WorkloadKind::Encryption, WorkloadKind::Bitmap})
        points[k] = default_scale_points(k, cfg);

    auto mean_speedup = [&](WorkloadKind k, const std::string& key) {
        return run_sweep(k, points[k], work, false, 1).mean_speedup.at(key);
    };

    BaselineFit fit;
    // ParaBit: one reallocation cost shared by all three workloads.
    work.baselines.flashcosmos.mws_us = work.baselines.flashcosmos.mws_us.value_or(cfg.ssd.t_R_us);
    work.baselines.flashcosmos.xor_us = work.baselines.flashcosmos.xor_us.value_or(cfg.ssd.t_R_us);
    auto parabit_obj = [&](double realloc) {
        work.baselines.parabit.realloc_us = realloc;
        double e = 0.0;
        for (auto k : {WorkloadKind::Segmentation, WorkloadKind::Encryption, WorkloadKind::Bitmap})
            e += log_error(mean_speedup(k, "parabit"), published_speedups(k, cfg).parabit);
        return e;
    };
    const double realloc = minimize_from(parabit_obj, 0.0);
    fit.parabit_objective = parabit_obj(realloc);

    // Flash-Cosmos: sensing cost for the AND workloads, XOR cost for encryption.
    // Either pass senses at least once, so neither may undercut a plain read.
    const double sense_floor = cfg.ssd.t_R_us;
    auto mws_obj = [&](double mws) {
        work.baselines.flashcosmos.mws_us = mws;
        return log_error(mean_speedup(WorkloadKind::Segmentation, "flashcosmos"),
                         published_speedups(WorkloadKind::Segmentation, cfg).flashcosmos) +
               log_error(mean_speedup(WorkloadKind::Bitmap, "flashcosmos"),
                         published_speedups(WorkloadKind::Bitmap, cfg).flashcosmos);
    };
    const double mws = minimize_from(mws_obj, sense_floor);
    auto xor_obj = [&](double x) {
        work.baselines.flashcosmos.xor_us = x;
        return log_error(mean_speedup(WorkloadKind::Encryption, "flashcosmos"),
                         published_speedups(WorkloadKind::Encryption, cfg).flashcosmos);
    };
    const double xr = minimize_from(xor_obj, sense_floor);

    work.baselines.parabit.realloc_us = realloc;
    work.baselines.flashcosmos.mws_us = mws;
    work.baselines.flashcosmos.xor_us = xr;
    fit.flashcosmos_objective = mws_obj(mws) + xor_obj(xr);
    fit.params = work.baselines;
    for (auto k : {WorkloadKind::Segmentation, WorkloadKind::Encryption, WorkloadKind::Bitmap}) {
        const auto s = run_sweep(k, points[k], work, false, 1);
        fit.fitted_speedup[k] = {{"parabit", s.mean_speedup.at("parabit")},
                                 {"flashcosmos", s.mean_speedup.at("flashcosmos")}};
    }
    return fit;
}

}  // namespace mcflash
