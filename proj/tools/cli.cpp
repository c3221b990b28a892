#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcflash/config.hpp"
#include "mcflash/errors.hpp"
#include "mcflash/mcflash_engine.hpp"
#include "mcflash/nand_device.hpp"
#include "mcflash/reliability_lab.hpp"
#include "mcflash/ssd_model.hpp"
#include "mcflash/workloads.hpp"
#include "report.hpp"

namespace mcflash::cli {

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    std::string out_dir;
    std::string format = "csv";
};

struct Context {
    SimConfig cfg;
    std::string config_hash;
    std::string config_source;
    std::uint64_t seed = 1;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<std::string> flatten(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& i : items)
        for (auto& p : split(i, ',')) out.push_back(std::move(p));
    return out;
}

double parse_number(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw UsageError("not a number: " + s);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("not a number: " + s);
    }
}

std::vector<double> parse_numbers(const std::vector<std::string>& items) {
    std::vector<double> out;
    for (const auto& s : flatten(items)) out.push_back(parse_number(s));
    return out;
}

std::vector<OpCode> parse_ops(const std::vector<std::string>& items, const std::vector<std::string>& fallback) {
    std::vector<OpCode> out;
    for (const auto& s : items.empty() ? fallback : flatten(items)) out.push_back(OpCode::parse(s));
    if (out.empty()) throw UsageError("no opcodes given");
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    std::array<std::uint32_t, 2> w{};
    seq.generate(w.begin(), w.end());
    return (std::uint64_t{w[0]} << 32) | w[1];
}

// "device.register_width_bits=10" sets /device/register_width_bits.
void apply_override(nlohmann::json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("override must look like key.path=value: " + assignment);
    std::string pointer;
    for (const auto& part : split(assignment.substr(0, eq), '.')) pointer += "/" + part;
    const std::string raw = assignment.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    const nlohmann::json::json_pointer ptr(pointer);
    if (!j.contains(ptr) && !j.contains(ptr.parent_pointer()))
        throw UsageError("unknown configuration key: " + assignment.substr(0, eq));
    j[ptr] = value;
}

Context make_context(const Common& c) {
    Context ctx;
    nlohmann::json j;
    if (c.config_path.empty()) {
        j = nlohmann::json::parse(default_config_text());
        ctx.config_source = "builtin-default";
    } else {
        std::ifstream in(c.config_path);
        if (!in) throw ConfigError("cannot open config file: " + c.config_path);
        j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + c.config_path);
        ctx.config_source = c.config_path;
    }
    for (const auto& o : c.overrides) apply_override(j, o);
    ctx.cfg = config_from_json(j);
    ctx.config_hash = sha256_hex(config_to_json(ctx.cfg).dump());
    ctx.seed = c.seed;
    return ctx;
}

Report new_report(const Context& ctx, const std::string& command) {
    Report r;
    r.meta("tool", std::string("mcflash ") + tool_version());
    r.meta("command", command);
    r.meta("config", ctx.config_source);
    r.meta("config_sha256", ctx.config_hash);
    r.meta("seed", std::to_string(ctx.seed));
    r.meta("units", "sizes binary (1 KiB = 1024 B, 1 GiB = 2^30 B); time us; energy uJ; voltage V; rber percent");
    return r;
}

void emit(const Report& r, const Common& c, const std::string& name, std::ostream& out) {
    const std::string ext = c.format == "json" ? "json" : "csv";
    auto write = [&](std::ostream& os) { c.format == "json" ? r.write_json(os) : r.write_csv(os); };
    if (c.out_dir.empty()) {
        write(out);
        return;
    }
    std::filesystem::create_directories(c.out_dir);
    const auto path = std::filesystem::path(c.out_dir) / (name + "." + ext);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    write(f);
    out << path.string() << '\n';
}

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

// Fresh device with enough whole blocks for `pages` wordlines.
NandDevice make_device(const SimConfig& cfg, std::size_t pages, std::uint64_t seed) {
    DeviceParams d = cfg.device;
    const std::size_t wpb = d.geometry.wordlines_per_block;
    d.geometry.blocks_per_plane = static_cast<std::uint32_t>(std::max<std::size_t>(1, (pages + wpb - 1) / wpb));
    return NandDevice(d, cfg.physics, seed);
}

std::uint32_t used_blocks(const NandDevice& dev) { return dev.geometry().blocks_per_plane; }

void require_pages(std::size_t pages) {
    if (pages == 0) throw UsageError("--pages must be at least 1");
}

const std::vector<std::string> kTruthOps{"and", "or", "xnor", "not", "nand-inv", "nor-inv", "xor-inv"};
const std::vector<std::string> kRberOps{"and", "or", "xnor", "not"};

// ---------------------------------------------------------------- truth-table

struct TruthOpts {
    std::vector<std::string> ops;
    std::uint64_t pe = 0;
};

struct TruthRow {
    OpCode op;
    Level level;
    bool expected = false;
    std::uint64_t cells = 0;
    std::uint64_t ones = 0;
    std::uint64_t errors = 0;
    bool degraded = false;
};

std::vector<TruthRow> truth_table(const SimConfig& cfg, OpCode op, std::uint64_t pe, std::uint64_t seed) {
    DeviceParams d = cfg.device;
    d.geometry.blocks_per_plane = 1;
    d.geometry.wordlines_per_block = 1;
    NandDevice dev(d, cfg.physics, seed);
    if (pe > 0) cycle_block(dev, 0, pe);
    const Engine engine(cfg.physics, d);
    const std::size_t n = dev.page_bits();
    BitVector lsb(n), msb(n);
    std::vector<Level> level(n);
    for (std::size_t i = 0; i < n; ++i) {
        // NOT operands keep LSB at zero, so only L2 and L3 occur.
        const Level l = op.unary() ? (i % 2 ? Level::L3 : Level::L2) : static_cast<Level>(i % 4);
        const CellState s = CellState::from_level(l);
        level[i] = l;
        lsb.set(i, s.lsb);
        msb.set(i, s.msb);
    }
    const WordlineAddr wl{0, 0};
    if (op.unary())
        write_unary_operand(dev, wl, msb);
    else
        write_operands(dev, wl, lsb, msb);
    const ExecResult res = engine.execute(dev, wl, op);
    std::vector<TruthRow> rows;
    for (std::size_t li = 0; li < kNumLevels; ++li) {
        const Level l = static_cast<Level>(li);
        const CellState s = CellState::from_level(l);
        if (op.unary() && s.lsb) continue;
        TruthRow r{op, l, host_eval(op.kind, s.lsb, s.msb)};
        r.degraded = res.degraded;
        for (std::size_t i = 0; i < n; ++i) {
            if (level[i] != l) continue;
            ++r.cells;
            const bool b = res.bits.get(i);
            r.ones += b;
            r.errors += b != r.expected;
        }
        rows.push_back(r);
    }
    return rows;
}

int cmd_truth_table(const Common& c, const TruthOpts& o, std::ostream& out) {
    const Context ctx = make_context(c);
    const auto ops = parse_ops(o.ops, kTruthOps);
    Report r = new_report(ctx, "truth-table");
    r.meta("pe_cycles", std::to_string(o.pe));
    r.columns({"op", "level", "lsb", "msb", "expected", "cells", "ones", "errors", "degraded", "verdict"});
    bool ok = true;
    for (std::size_t k = 0; k < ops.size(); ++k) {
        for (const auto& t : truth_table(ctx.cfg, ops[k], o.pe, derive_seed(ctx.seed, k))) {
            const CellState s = CellState::from_level(t.level);
            ok = ok && t.errors == 0;
            r.row({t.op.name(), to_string(t.level), std::int64_t{s.lsb}, std::int64_t{s.msb}, std::int64_t{t.expected},
                   t.cells, t.ones, t.errors, t.degraded, std::string(t.errors == 0 ? "PASS" : "FAIL")});
        }
    }
    emit(r, c, "truth_table", out);
    return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- rber / cycle / bake

struct RberOpts {
    std::vector<std::string> ops;
    std::uint64_t pe = 0;
    double hours = 0.0;
    std::size_t pages = 1000;
    std::string sweep;
    int lo = 0, hi = 0, stride = 1;
    bool range_given = false;
    std::size_t pages_per_point = 4;
};

RberReport run_rber(const SimConfig& cfg, OpCode op, std::uint64_t pe, double hours, std::size_t pages,
                    std::uint64_t seed) {
    NandDevice dev = make_device(cfg, pages, seed);
    const Engine engine(cfg.physics, dev.params());
    for (std::uint32_t b = 0; b < used_blocks(dev); ++b)
        if (pe > 0) cycle_block(dev, b, pe);
    std::mt19937_64 rng(derive_seed(seed, 0x5eed));
    const PreparedPages prepared = prepare_pages(dev, op, pages, rng);
    if (hours > 0.0)
        for (std::uint32_t b = 0; b < used_blocks(dev); ++b) retention_bake(dev, b, hours);
    return evaluate_pages(dev, engine, prepared);
}

void rber_columns(Report& r) {
    r.columns({"op", "pe_cycles", "retention_hours", "pages", "bits", "mismatches", "rber_percent",
               "upper_bound_percent", "degraded", "windows_open"});
}

void rber_row(Report& r, const SimConfig& cfg, const RberReport& rep) {
    const bool open = windows_open(distributions(rep.wear, cfg.physics), cfg.physics.k_sigma);
    r.row({rep.op.name(), rep.wear.pe_cycles, rep.wear.retention_hours, rep.pages_tested, rep.bits_compared,
           rep.mismatches, rep.rber_percent, opt(rep.upper_bound_percent), rep.degraded, open});
}

struct SweepOpts {
    std::string op = "and";
    std::string ref = "auto";
    std::vector<std::string> pe{"0"};
    double hours = 0.0;
    int lo = 0, hi = 0, stride = 1;
    bool range_given = false;
    std::size_t pages = 4;
};

SweepTarget pick_target(const std::string& ref, const OffsetPlan& plan) {
    if (ref != "auto") return SweepTarget::parse(ref);
    if (plan.read_kind == ReadKind::Lsb) return SweepTarget{1, false};
    for (std::size_t v = 0; v < 3; ++v)
        if (v != 1 && plan.cfg.offset[v] != 0) return SweepTarget{v, false};
    return SweepTarget{plan.read_kind == ReadKind::Msb ? 2u : 0u, false};
}

int cmd_sweep(const Common& c, const SweepOpts& o, std::ostream& out) {
    const Context ctx = make_context(c);
    const OpCode op = OpCode::parse(o.op);
    const auto pes = parse_numbers(o.pe);
    if (pes.empty()) throw UsageError("--pe needs at least one value");
    if (o.stride < 1) throw UsageError("--stride must be positive");
    require_pages(o.pages);
    const Engine probe(ctx.cfg.physics, ctx.cfg.device);
    const SweepTarget target = pick_target(o.ref, probe.plan(op));
    const ReadRefConfig reg = ctx.cfg.device.default_config();
    const int lo = o.range_given ? o.lo : reg.min_offset();
    const int hi = o.range_given ? o.hi : reg.max_offset();
    if (lo > hi) throw UsageError("--lo must not exceed --hi");

    Report r = new_report(ctx, "sweep");
    r.meta("op", op.name());
    r.meta("register", target.name());
    r.meta("pages_per_point", std::to_string(o.pages));
    r.columns({"op", "register", "pe_cycles", "retention_hours", "offset_steps", "offset_v", "bits", "mismatches",
               "rber_percent", "in_zero_window"});
    for (std::size_t k = 0; k < pes.size(); ++k) {
        if (pes[k] < 0) throw UsageError("--pe values must be non-negative");
        const auto pe = static_cast<std::uint64_t>(std::llround(pes[k]));
        const std::uint64_t seed = derive_seed(ctx.seed, k, 0x5eeb);
        NandDevice dev = make_device(ctx.cfg, o.pages, seed);
        const Engine engine(ctx.cfg.physics, dev.params());
        for (std::uint32_t b = 0; b < used_blocks(dev); ++b) {
            if (pe > 0) cycle_block(dev, b, pe);
        }
        std::mt19937_64 rng(derive_seed(seed, 1));
        SweepCurve curve;
        if (o.hours > 0.0) {
            // Bake needs programmed pages, so the sweep sees pages written before the bake.
            PreparedPages prepared = prepare_pages(dev, op, o.pages, rng);
            for (std::uint32_t b = 0; b < used_blocks(dev); ++b) retention_bake(dev, b, o.hours);
            curve.op = op;
            curve.target = target;
            for (int s = lo; s <= hi; s += o.stride) {
                OffsetPlan plan = engine.plan(op);
                ReadRefConfig& regc = target.minus_cfg ? plan.cfg_minus : plan.cfg;
                regc.offset[target.vref] = s;
                RberReport rep;
                rep.op = op;
                for (std::size_t i = 0; i < prepared.wordlines.size(); ++i) {
                    const ExecResult res = execute_plan(dev, prepared.wordlines[i], plan);
                    rep.mismatches += hamming(res.bits, prepared.expected[i]);
                    rep.bits_compared += res.bits.size();
                }
                curve.offset_steps.push_back(s);
                curve.mismatches.push_back(rep.mismatches);
                curve.rber_percent.push_back(100.0 * static_cast<double>(rep.mismatches) /
                                             static_cast<double>(rep.bits_compared));
                curve.bits_per_point = rep.bits_compared;
            }
            curve.zero_window = find_zero_window(curve.offset_steps, curve.mismatches);
        } else {
            curve = sweep_offset(dev, engine, op, target, lo, hi, o.stride, o.pages, rng);
        }
        const auto w = curve.zero_window;
        r.meta("zero_window_pe_" + std::to_string(pe),
               w ? std::to_string(w->first) + ".." + std::to_string(w->second) + " (" +
                       std::to_string(curve.window_width()) + " steps)"
                 : std::string("none"));
        for (std::size_t i = 0; i < curve.offset_steps.size(); ++i) {
            const int s = curve.offset_steps[i];
            const bool in = w && s >= w->first && s <= w->second;
            r.row({op.name(), target.name(), pe, o.hours, std::int64_t{s}, s * ctx.cfg.device.dac_step,
                   curve.bits_per_point, curve.mismatches[i], curve.rber_percent[i], in});
        }
    }
    emit(r, c, "sweep", out);
    return kExitOk;
}

int cmd_rber(const Common& c, const RberOpts& o, std::ostream& out) {
    if (!o.sweep.empty()) {
        SweepOpts s;
        const auto ops = flatten(o.ops);
        if (ops.size() > 1) throw UsageError("--sweep takes a single --op");
        s.op = ops.empty() ? "and" : ops.front();
        s.ref = o.sweep;
        s.pe = {std::to_string(o.pe)};
        s.hours = o.hours;
        s.lo = o.lo;
        s.hi = o.hi;
        s.stride = o.stride;
        s.range_given = o.range_given;
        s.pages = o.pages_per_point;
        return cmd_sweep(c, s, out);
    }
    const Context ctx = make_context(c);
    const auto ops = parse_ops(o.ops, kRberOps);
    require_pages(o.pages);
    if (o.hours < 0.0) throw UsageError("--hours must be non-negative");
    Report r = new_report(ctx, "rber");
    rber_columns(r);
    for (std::size_t k = 0; k < ops.size(); ++k)
        rber_row(r, ctx.cfg, run_rber(ctx.cfg, ops[k], o.pe, o.hours, o.pages, derive_seed(ctx.seed, k)));
    emit(r, c, "rber", out);
    return kExitOk;
}

struct CycleOpts {
    std::vector<std::string> ops;
    std::vector<std::string> pe{"0,1500,3000,6000,10000"};
    std::size_t pages = 64;
};

int cmd_cycle(const Common& c, const CycleOpts& o, std::ostream& out) {
    const Context ctx = make_context(c);
    const auto ops = parse_ops(o.ops, kRberOps);
    const auto pes = parse_numbers(o.pe);
    require_pages(o.pages);
    Report r = new_report(ctx, "cycle");
    r.columns({"op", "pe_cycles", "erase_count", "pages", "bits", "mismatches", "rber_percent", "upper_bound_percent",
               "degraded", "windows_open"});
    for (std::size_t k = 0; k < ops.size(); ++k) {
        // One device per opcode, cycled cumulatively through the requested counts.
        const std::uint64_t seed = derive_seed(ctx.seed, k);
        NandDevice dev = make_device(ctx.cfg, o.pages, seed);
        const Engine engine(ctx.cfg.physics, dev.params());
        std::mt19937_64 rng(derive_seed(seed, 0x5eed));
        std::uint64_t done = 0;
        bool first = true;
        for (double p : pes) {
            if (p < 0) throw UsageError("--pe values must be non-negative");
            const auto target = static_cast<std::uint64_t>(std::llround(p));
            // Pages measured at one count must be erased before the next, so counts strictly increase.
            if (!first && target <= done) throw UsageError("--pe values must be strictly increasing");
            if (target > done)
                for (std::uint32_t b = 0; b < used_blocks(dev); ++b) cycle_block(dev, b, target - done);
            done = target;
            first = false;
            const RberReport rep = measure_rber(dev, engine, ops[k], o.pages, rng);
            const bool open = windows_open(distributions(rep.wear, ctx.cfg.physics), ctx.cfg.physics.k_sigma);
            r.row({rep.op.name(), rep.wear.pe_cycles, dev.block_meta(0).erase_count, rep.pages_tested,
                   rep.bits_compared, rep.mismatches, rep.rber_percent, opt(rep.upper_bound_percent), rep.degraded,
                   open});
        }
    }
    emit(r, c, "cycle", out);
    return kExitOk;
}

struct BakeOpts {
    std::vector<std::string> ops;
    std::uint64_t pe = 1500;
    std::vector<std::string> hours{"0,1,24,168,720"};
    std::size_t pages = 64;
};

int cmd_bake(const Common& c, const BakeOpts& o, std::ostream& out) {
    const Context ctx = make_context(c);
    const auto ops = parse_ops(o.ops, kRberOps);
    const auto hours = parse_numbers(o.hours);
    require_pages(o.pages);
    Report r = new_report(ctx, "bake");
    r.meta("note", "the same pages are re-read after each cumulative bake");
    rber_columns(r);
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const std::uint64_t seed = derive_seed(ctx.seed, k);
        NandDevice dev = make_device(ctx.cfg, o.pages, seed);
        const Engine engine(ctx.cfg.physics, dev.params());
        for (std::uint32_t b = 0; b < used_blocks(dev); ++b)
            if (o.pe > 0) cycle_block(dev, b, o.pe);
        std::mt19937_64 rng(derive_seed(seed, 0x5eed));
        const PreparedPages prepared = prepare_pages(dev, ops[k], o.pages, rng);
        double baked = 0.0;
        for (double h : hours) {
            if (h < baked) throw UsageError("--hours values must be non-decreasing");
            if (h > baked)
                for (std::uint32_t b = 0; b < used_blocks(dev); ++b) retention_bake(dev, b, h - baked);
            baked = h;
            rber_row(r, ctx.cfg, evaluate_pages(dev, engine, prepared));
        }
    }
    emit(r, c, "bake", out);
    return kExitOk;
}

// ---------------------------------------------------------------- calibrate

struct CalOpts {
    std::string out_config;
    bool baselines = false;
    std::size_t verify_pages = 0;
};

int cmd_calibrate(const Common& c, const CalOpts& o, std::ostream& out) {
    const Context ctx = make_context(c);
    SimConfig fitted = ctx.cfg;
    const CalibrationResult cal = calibrate(ctx.cfg.calibration, ctx.cfg.physics, ctx.cfg.device);
    fitted.physics.wear = cal.wear;

    Report r = new_report(ctx, "calibrate");
    r.columns({"group", "key", "value", "target", "band_lo", "band_hi"});
    for (std::size_t i = 0; i < kNumLevels; ++i) {
        const std::string l = to_string(static_cast<Level>(i));
        r.row({std::string("wear"), "sigma_coeff_" + l, cal.wear.sigma_coeff[i], {}, {}, {}});
        r.row({std::string("wear"), "sigma_exponent_" + l, cal.wear.sigma_exponent[i], {}, {}, {}});
    }
    r.row({std::string("fit"), std::string("objective"), cal.objective, {}, {}, {}});
    const auto& targets = ctx.cfg.calibration.targets;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        r.row({std::string("fit"), t.op.name() + "_rber_percent", cal.fitted_percent[i], t.target_percent,
               t.band_lo_percent, t.band_hi_percent});
        r.row({std::string("fresh"), t.op.name() + "_expected_mismatches", cal.fresh_expected_mismatches[i],
               ctx.cfg.calibration.fresh_max_expected_mismatches, {}, {}});
    }
    r.row({std::string("heavy"), std::string("windows_closed"), cal.heavy_window_closed, {}, {}, {}});
    if (o.verify_pages > 0) {
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const RberReport rep =
                run_rber(fitted, targets[i].op, ctx.cfg.calibration.pe_cycles, ctx.cfg.calibration.retention_hours,
                         o.verify_pages, derive_seed(ctx.seed, i, 0xca1));
            r.row({std::string("verify"), targets[i].op.name() + "_measured_percent", rep.rber_percent,
                   targets[i].target_percent, targets[i].band_lo_percent, targets[i].band_hi_percent});
        }
    }
    if (o.baselines) {
        const BaselineFit fit = calibrate_baselines(fitted);
        fitted.baselines = fit.params;
        r.meta("baselines", "calibrated to published average speedups, not derived");
        r.row({std::string("baseline"), std::string("parabit_op_us"), opt(fit.params.parabit.op_us), {}, {}, {}});
        r.row({std::string("baseline"), std::string("parabit_realloc_us"), opt(fit.params.parabit.realloc_us), {}, {},
               {}});
        r.row({std::string("baseline"), std::string("flashcosmos_mws_us"), opt(fit.params.flashcosmos.mws_us), {}, {},
               {}});
        r.row({std::string("baseline"), std::string("flashcosmos_xor_us"), opt(fit.params.flashcosmos.xor_us), {}, {},
               {}});
        r.row({std::string("baseline"), std::string("parabit_objective"), fit.parabit_objective, {}, {}, {}});
        r.row({std::string("baseline"), std::string("flashcosmos_objective"), fit.flashcosmos_objective, {}, {}, {}});
        for (const auto& [kind, m] : fit.fitted_speedup) {
            const auto& published = published_speedups(kind, fitted);
            for (const auto& [key, v] : m) {
                const double target = key == "parabit" ? published.parabit : published.flashcosmos;
                r.row({std::string("baseline"), to_string(kind) + "_" + key + "_speedup", v, target, {}, {}});
            }
        }
    }
    if (!o.out_config.empty()) {
        save_config(fitted, o.out_config);
        r.meta("written_config", o.out_config);
        r.meta("written_config_sha256", sha256_hex(config_to_json(fitted).dump()));
    }
    emit(r, c, "calibrate", out);
    return kExitOk;
}

// ---------------------------------------------------------------- timeline

struct TimelineOpts {
    std::vector<std::string> paradigms;
    std::string op;
    unsigned operands = 2;
};

int cmd_timeline(const Common& c, const TimelineOpts& o, std::ostream& out) {
    const Context ctx = make_context(c);
    std::vector<Paradigm> ps;
    const auto names =
        o.paradigms.empty() ? std::vector<std::string>{"osc", "isc", "ifc-aligned", "ifc-nonaligned"} : flatten(o.paradigms);
    for (const auto& n : names) ps.push_back(parse_paradigm(n));
    std::optional<OpCode> op;
    if (!o.op.empty()) op = OpCode::parse(o.op);
    if (o.operands < 2) throw UsageError("--operands must be at least 2");

    Report r = new_report(ctx, "timeline");
    r.meta("scenario", std::to_string(o.operands) + " operand vectors of one stripe (" +
                           std::to_string(ctx.cfg.ssd.total_planes()) + " planes x " +
                           std::to_string(ctx.cfg.ssd.page_kib) + " KiB) each");
    r.columns({"paradigm", "op", "component", "us", "calibrated"});
    for (Paradigm p : ps) {
        Timeline t;
        if (p == Paradigm::ParaBit || p == Paradigm::FlashCosmos) {
            t = baseline_timeline(p, ctx.cfg.ssd, op.value_or(OpCode(OpKind::And)), ctx.cfg.baselines, o.operands);
        } else if (o.operands == 2) {
            t = timeline(p, ctx.cfg.ssd, op);
        } else {
            const bool non = p == Paradigm::IfcNonAligned;
            const ChainShape shape{o.operands, op, non ? 1u : o.operands - 1, non ? o.operands - 2 : 0u};
            t = chain_timeline(p, ctx.cfg.ssd, shape);
        }
        const std::string opname = op ? op->name() : std::string();
        for (const auto& ph : t.breakdown) r.row({to_string(p), opname, ph.name, ph.us, t.calibrated});
        r.row({to_string(p), opname, std::string("total"), t.total_us, t.calibrated});
    }
    emit(r, c, "timeline", out);
    return kExitOk;
}

// ---------------------------------------------------------------- workload

struct WorkloadOpts {
    std::string kind;
    std::string scale;
    std::optional<unsigned> days;
    bool no_check = false;
};

std::vector<double> scale_points(const std::string& spec, WorkloadKind kind, const SimConfig& cfg) {
    if (spec.empty()) return default_scale_points(kind, cfg);
    const auto dots = spec.find("..");
    if (dots == std::string::npos) return parse_numbers({spec});
    const double a = parse_number(spec.substr(0, dots));
    const double b = parse_number(spec.substr(dots + 2));
    if (a > b) throw UsageError("scale range must be low..high");
    std::vector<double> pts;
    for (double x : default_scale_points(kind, cfg))
        if (x >= a && x <= b) pts.push_back(x);
    if (pts.size() < 2) {
        pts.clear();
        for (int i = 0; i < 5; ++i) pts.push_back(a + (b - a) * i / 4.0);
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    }
    return pts;
}

int cmd_workload(const Common& c, const WorkloadOpts& o, std::ostream& out) {
    const Context ctx = make_context(c);
    const WorkloadKind kind = parse_workload(o.kind);
    const auto pts = scale_points(o.scale, kind, ctx.cfg);
    std::vector<WorkloadResult> results;
    for (double x : pts) {
        WorkloadSpec spec{kind, x, o.days, !o.no_check, ctx.seed};
        results.push_back(run_workload(spec, ctx.cfg));
    }
    Report r = new_report(ctx, "workload");
    r.meta("workload", to_string(kind));
    if (results.empty() || !results.front().baselines_calibrated)
        r.meta("baselines", "missing parameters; baseline columns left empty");
    else
        r.meta("baselines", "calibrated to published average speedups, not derived");
    std::vector<std::string> cols{"workload", "scale", "stripes", "operands", "mcflash_aligned_ops",
                                  "mcflash_nonaligned_ops"};
    for (const auto& k : kResultParadigms) cols.push_back("t_" + k + "_us");
    for (const auto& k : kBaselineKeys) cols.push_back("speedup_vs_" + k);
    cols.insert(cols.end(), {"bits_checked", "mismatches"});
    r.columns(cols);
    auto value = [](const std::map<std::string, double>& m, const std::string& k) -> Cell {
        auto it = m.find(k);
        return it == m.end() ? Cell{} : Cell{it->second};
    };
    std::map<std::string, double> sums;
    std::map<std::string, std::size_t> counts;
    std::uint64_t mismatches = 0, bits = 0;
    for (const auto& w : results) {
        std::vector<Cell> row{to_string(kind), w.scale, w.stripes, std::uint64_t{w.operands},
                              std::uint64_t{w.mcflash_shape.aligned_ops}, std::uint64_t{w.mcflash_shape.nonaligned_ops}};
        for (const auto& k : kResultParadigms) row.push_back(value(w.total_us, k));
        for (const auto& k : kBaselineKeys) {
            row.push_back(value(w.speedup, k));
            if (auto it = w.speedup.find(k); it != w.speedup.end()) {
                sums[k] += it->second;
                ++counts[k];
            }
        }
        row.push_back(w.bits_checked);
        row.push_back(w.mismatches);
        mismatches += w.mismatches;
        bits += w.bits_checked;
        r.row(std::move(row));
    }
    const auto& published = published_speedups(kind, ctx.cfg);
    const std::map<std::string, double> published_map{
        {"osc", published.osc}, {"isc", published.isc}, {"parabit", published.parabit}, {"flashcosmos", published.flashcosmos}};
    for (const char* label : {"mean", "reference"}) {
        std::vector<Cell> row{to_string(kind), std::string(label), {}, {}, {}, {}};
        for (std::size_t i = 0; i < kResultParadigms.size(); ++i) row.push_back({});
        for (const auto& k : kBaselineKeys) {
            if (std::string(label) == "mean")
                row.push_back(counts[k] ? Cell{sums[k] / static_cast<double>(counts[k])} : Cell{});
            else
                row.push_back(published_map.at(k));
        }
        row.push_back(std::string(label) == "mean" ? Cell{bits} : Cell{});
        row.push_back(std::string(label) == "mean" ? Cell{mismatches} : Cell{});
        r.row(std::move(row));
    }
    emit(r, c, "workload_" + to_string(kind), out);
    return mismatches == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- demo

int cmd_demo(const Common& c, std::ostream& out) {
    const Context ctx = make_context(c);
    const SimConfig& cfg = ctx.cfg;
    Report r = new_report(ctx, "demo");
    r.columns({"section", "item", "value", "status"});
    bool ok = true;

    const Engine engine(cfg.physics, cfg.device);
    for (const OpCode& op : all_opcodes()) {
        const OffsetPlan& p = engine.plan(op);
        std::ostringstream os;
        os << to_string(p.read_kind) << " [" << p.cfg.offset[0] << ", " << p.cfg.offset[1] << ", " << p.cfg.offset[2]
           << "]";
        if (p.read_kind == ReadKind::Sbr)
            os << " minus [" << p.cfg_minus.offset[0] << ", " << p.cfg_minus.offset[1] << ", " << p.cfg_minus.offset[2]
               << "]";
        if (p.inverse) os << " inverse";
        r.row({std::string("plan"), op.name(), os.str(), std::string(p.degraded ? "degraded" : "ok")});
    }
    for (std::size_t k = 0; k < kTruthOps.size(); ++k) {
        const OpCode op = OpCode::parse(kTruthOps[k]);
        std::uint64_t errors = 0;
        for (const auto& t : truth_table(cfg, op, 0, derive_seed(ctx.seed, k))) errors += t.errors;
        ok = ok && errors == 0;
        r.row({std::string("truth-table"), op.name(), errors, std::string(errors == 0 ? "PASS" : "FAIL")});
    }
    for (std::size_t k = 0; k < kRberOps.size(); ++k) {
        const OpCode op = OpCode::parse(kRberOps[k]);
        const RberReport rep = run_rber(cfg, op, 0, 0.0, 8, derive_seed(ctx.seed, k, 0xde));
        ok = ok && rep.mismatches == 0;
        r.row({std::string("fresh-rber-percent"), op.name(), rep.rber_percent,
               std::string(rep.mismatches == 0 ? "PASS" : "FAIL")});
    }
    for (Paradigm p : {Paradigm::Osc, Paradigm::Isc, Paradigm::IfcAligned, Paradigm::IfcNonAligned})
        r.row({std::string("timeline-us"), to_string(p), timeline(p, cfg.ssd).total_us, std::string("model")});
    for (const char* name : {"and", "or", "xnor", "not"}) {
        const OpCode op = OpCode::parse(name);
        r.row({std::string("energy-uj-per-kib"), op.name(), energy_per_kb(op, cfg.energy, cfg.ssd.page_kib),
               std::string("model")});
    }
    for (auto kind : {WorkloadKind::Segmentation, WorkloadKind::Encryption, WorkloadKind::Bitmap}) {
        const auto pts = default_scale_points(kind, cfg);
        WorkloadSpec spec{kind, pts.front(), std::nullopt, true, ctx.seed};
        const WorkloadResult w = run_workload(spec, cfg);
        ok = ok && w.mismatches == 0;
        for (const auto& k : {"osc", "isc"})
            r.row({std::string("speedup-") + to_string(kind), std::string(k), w.speedup.at(k),
                   std::string(w.mismatches == 0 ? "checked" : "FAIL")});
    }
    emit(r, c, "demo", out);
    return ok ? kExitOk : kExitFailure;
}

void add_common(CLI::App& app, Common& c) {
    app.add_option("--config", c.config_path, "JSON configuration file (default: built-in)");
    app.add_option("--set", c.overrides, "Override a configuration value, e.g. device.register_width_bits=10");
    app.add_option("--seed", c.seed, "Master seed");
    app.add_option("--out-dir", c.out_dir, "Write the report into this directory instead of stdout");
    app.add_option("--format", c.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Behavioral simulator for in-flash bitwise computing on MLC NAND", "mcflash"};
    app.set_version_flag("--version", std::string("mcflash ") + tool_version());
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    add_common(app, common);
    std::function<int()> action;

    TruthOpts truth;
    auto* tt = app.add_subcommand("truth-table", "Check every opcode's decoded output for each cell level");
    tt->add_option("--ops", truth.ops, "Opcodes (default: and,or,xnor,not,nand-inv,nor-inv,xor-inv)");
    tt->add_option("--pe", truth.pe, "P/E cycles applied before programming");
    tt->callback([&] { action = [&] { return cmd_truth_table(common, truth, out); }; });

    RberOpts rber;
    auto* rb = app.add_subcommand("rber", "Measure raw bit error rate of opcodes at a wear point");
    rb->add_option("--op,--ops", rber.ops, "Opcodes (default: and,or,xnor,not)");
    rb->add_option("--pe", rber.pe, "P/E cycles");
    rb->add_option("--hours", rber.hours, "Retention hours after programming");
    rb->add_option("--pages", rber.pages, "Pages per opcode");
    rb->add_option("--sweep", rber.sweep, "Sweep a register instead (vref0, vref1, vref2, vrefN-minus, auto)");
    auto* rlo = rb->add_option("--lo", rber.lo, "Sweep start (DAC steps)");
    auto* rhi = rb->add_option("--hi", rber.hi, "Sweep end (DAC steps)");
    rb->add_option("--stride", rber.stride, "Sweep stride (DAC steps)");
    rb->add_option("--pages-per-point", rber.pages_per_point, "Pages per sweep point");
    rb->callback([&] {
        rber.range_given = rlo->count() > 0 || rhi->count() > 0;
        if (rber.range_given && (rlo->count() == 0 || rhi->count() == 0))
            throw CLI::ValidationError("--lo and --hi must be given together");
        action = [&] { return cmd_rber(common, rber, out); };
    });

    SweepOpts sweep;
    auto* sw = app.add_subcommand("sweep", "RBER versus one reference offset, reporting the zero-error window");
    sw->add_option("--op", sweep.op, "Opcode");
    sw->add_option("--ref", sweep.ref, "Register: vref0, vref1, vref2, vrefN-minus or auto");
    sw->add_option("--pe", sweep.pe, "P/E cycle counts, comma separated");
    sw->add_option("--hours", sweep.hours, "Retention hours");
    auto* slo = sw->add_option("--lo", sweep.lo, "Start offset (DAC steps)");
    auto* shi = sw->add_option("--hi", sweep.hi, "End offset (DAC steps)");
    sw->add_option("--stride", sweep.stride, "Stride (DAC steps)");
    sw->add_option("--pages", sweep.pages, "Pages per point");
    sw->callback([&] {
        sweep.range_given = slo->count() > 0 || shi->count() > 0;
        if (sweep.range_given && (slo->count() == 0 || shi->count() == 0))
            throw CLI::ValidationError("--lo and --hi must be given together");
        action = [&] { return cmd_sweep(common, sweep, out); };
    });

    CycleOpts cyc;
    auto* cy = app.add_subcommand("cycle", "RBER as blocks are cycled through increasing P/E counts");
    cy->add_option("--ops", cyc.ops, "Opcodes (default: and,or,xnor,not)");
    cy->add_option("--pe", cyc.pe, "Non-decreasing P/E counts, comma separated");
    cy->add_option("--pages", cyc.pages, "Pages per measurement");
    cy->callback([&] { action = [&] { return cmd_cycle(common, cyc, out); }; });

    BakeOpts bake;
    auto* bk = app.add_subcommand("bake", "RBER of the same pages across cumulative retention bakes");
    bk->add_option("--ops", bake.ops, "Opcodes (default: and,or,xnor,not)");
    bk->add_option("--pe", bake.pe, "P/E cycles before programming");
    bk->add_option("--hours", bake.hours, "Non-decreasing cumulative hours, comma separated");
    bk->add_option("--pages", bake.pages, "Pages per opcode");
    bk->callback([&] { action = [&] { return cmd_bake(common, bake, out); }; });

    CalOpts cal;
    auto* ca = app.add_subcommand("calibrate", "Fit wear coefficients (and optionally baselines) to targets");
    ca->add_option("--out", cal.out_config, "Write the fitted configuration to this file");
    ca->add_flag("--baselines", cal.baselines, "Also fit baseline timing parameters");
    ca->add_option("--verify-pages", cal.verify_pages, "Monte Carlo check of the fit with this many pages");
    ca->callback([&] { action = [&] { return cmd_calibrate(common, cal, out); }; });

    TimelineOpts tl;
    auto* ti = app.add_subcommand("timeline", "Latency breakdown of computing paradigms");
    ti->add_option("--paradigms", tl.paradigms,
                   "osc, isc, ifc-aligned, ifc-nonaligned, parabit, flashcosmos (default: first four)");
    ti->add_option("--op", tl.op, "Opcode whose read latency is used (default: generic read)");
    ti->add_option("--operands", tl.operands, "Operand vectors");
    ti->callback([&] { action = [&] { return cmd_timeline(common, tl, out); }; });

    WorkloadOpts wl;
    auto* wk = app.add_subcommand("workload", "End-to-end workload latency and speedups");
    wk->add_option("--kind", wl.kind, "segmentation, encryption or bitmap")->required();
    wk->add_option("--scale", wl.scale, "Scale value, list a,b,c or range a..b");
    wk->add_option("--days", wl.days, "Bitmap: number of days queried");
    wk->add_flag("--no-check", wl.no_check, "Skip the functional check");
    wk->callback([&] { action = [&] { return cmd_workload(common, wl, out); }; });

    auto* de = app.add_subcommand("demo", "Short end-to-end tour with built-in checks");
    de->callback([&] { action = [&] { return cmd_demo(common, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    try {
        return action();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const CapacityError& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const RangeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace mcflash::cli
