#include "mcflash/mcflash_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "mcflash/errors.hpp"

namespace mcflash {

OpCode::OpCode(OpKind k, bool inverse) : kind(k), use_inverse_read(inverse) {
    if (inverse && k != OpKind::Nand && k != OpKind::Nor && k != OpKind::Xor)
        throw std::invalid_argument("inverse read applies only to NAND, NOR and XOR");
}

OpCode OpCode::parse(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    bool inverse = false;
    if (s.size() > 4 && s.compare(s.size() - 4, 4, "-inv") == 0) {
        inverse = true;
        s.resize(s.size() - 4);
    }
    static const std::pair<const char*, OpKind> names[] = {
        {"and", OpKind::And},   {"or", OpKind::Or},   {"xnor", OpKind::Xnor}, {"not", OpKind::Not},
        {"nand", OpKind::Nand}, {"nor", OpKind::Nor}, {"xor", OpKind::Xor}};
    for (const auto& [n, k] : names)
        if (s == n) return OpCode(k, inverse);
    throw std::invalid_argument("unknown opcode: " + std::string(name));
}

std::string OpCode::name() const {
    static const char* names[] = {"and", "or", "xnor", "not", "nand", "nor", "xor"};
    std::string n = names[static_cast<std::size_t>(kind)];
    return use_inverse_read ? n + "-inv" : n;
}

std::vector<OpCode> all_opcodes() {
    std::vector<OpCode> ops;
    for (auto k : kAllOpKinds) ops.emplace_back(k);
    ops.emplace_back(OpKind::Nand, true);
    ops.emplace_back(OpKind::Nor, true);
    ops.emplace_back(OpKind::Xor, true);
    return ops;
}

bool host_eval(OpKind kind, bool a, bool b) noexcept {
    switch (kind) {
        case OpKind::And: return a && b;
        case OpKind::Or: return a || b;
        case OpKind::Xnor: return a == b;
        case OpKind::Not: return !b;
        case OpKind::Nand: return !(a && b);
        case OpKind::Nor: return !(a || b);
        case OpKind::Xor: return a != b;
    }
    return false;
}

BitVector host_apply(OpKind kind, const BitVector& a, const BitVector& b) {
    switch (kind) {
        case OpKind::And: return a & b;
        case OpKind::Or: return a | b;
        case OpKind::Xnor: return ~(a ^ b);
        case OpKind::Not: return ~b;
        case OpKind::Nand: return ~(a & b);
        case OpKind::Nor: return ~(a | b);
        case OpKind::Xor: return a ^ b;
    }
    return {};
}

std::string to_string(ReadKind k) {
    switch (k) {
        case ReadKind::Lsb: return "LSB";
        case ReadKind::Msb: return "MSB";
        case ReadKind::Sbr: return "SBR";
    }
    return "?";
}

int phases_of(ReadKind k) noexcept {
    switch (k) {
        case ReadKind::Lsb: return kLsbPhases;
        case ReadKind::Msb: return kMsbPhases;
        case ReadKind::Sbr: return kSbrPhases;
    }
    return 0;
}

ReadKind read_kind_of(OpCode op) noexcept {
    OpKind k = op.kind;
    if (op.use_inverse_read) k = k == OpKind::Nand ? OpKind::And : k == OpKind::Nor ? OpKind::Or : OpKind::Xnor;
    switch (k) {
        case OpKind::And: return ReadKind::Lsb;
        case OpKind::Or:
        case OpKind::Not:
        case OpKind::Nand: return ReadKind::Msb;
        case OpKind::Xnor:
        case OpKind::Nor:
        case OpKind::Xor: return ReadKind::Sbr;
    }
    return ReadKind::Lsb;
}

int sensing_phases(OpCode op) noexcept { return phases_of(read_kind_of(op)); }

PlanContext PlanContext::from(const DeviceParams& device, const PhysicsParams& physics) {
    return PlanContext{device.default_refs, device.dac_step, device.register_width, physics.k_sigma,
                       physics.edge_k_sigma};
}

namespace {

enum class Round { Nearest, Up, Down };

class Planner {
public:
    Planner(const std::array<StateDistribution, 4>& d, const PlanContext& ctx) : d_(d), ctx_(ctx) {
        base_.dac_step = ctx.dac_step;
        base_.register_width = ctx.register_width;
    }

    double valley(std::size_t lower) const {
        const double k = ctx_.k_sigma;
        return 0.5 * ((d_[lower].mean + k * d_[lower].sigma) + (d_[lower + 1].mean - k * d_[lower + 1].sigma));
    }
    double above_l3() const { return d_[3].mean + ctx_.edge_k_sigma * d_[3].sigma + ctx_.dac_step; }
    double below_l0() const { return d_[0].mean - (ctx_.edge_k_sigma * d_[0].sigma + ctx_.dac_step); }

    // Signed DAC steps moving reference `vref` onto `target`, clamped.
    int steps(std::size_t vref, double target, Round mode) {
        const double x = (target - ctx_.default_refs[vref]) / ctx_.dac_step;
        double n = 0;
        switch (mode) {
            case Round::Nearest: n = std::round(x); break;
            case Round::Up: n = std::ceil(x - 1e-9); break;
            case Round::Down: n = std::floor(x + 1e-9); break;
        }
        const double lo = base_.min_offset(), hi = base_.max_offset();
        if (n < lo || n > hi) degraded_ = true;
        return static_cast<int>(std::clamp(n, lo, hi));
    }

    ReadRefConfig cfg(int o0 = 0, int o1 = 0, int o2 = 0) const {
        ReadRefConfig c = base_;
        c.offset = {o0, o1, o2};
        return c;
    }

    bool degraded() const noexcept { return degraded_; }

private:
    const std::array<StateDistribution, 4>& d_;
    const PlanContext& ctx_;
    ReadRefConfig base_;
    bool degraded_ = false;
};

}  // namespace

OffsetPlan plan_offsets(OpCode op, const std::array<StateDistribution, 4>& dists, const PlanContext& ctx) {
    Planner p(dists, ctx);
    OffsetPlan plan;
    plan.op = op;
    plan.read_kind = read_kind_of(op);
    plan.inverse = op.use_inverse_read;
    plan.cfg = p.cfg();
    plan.cfg_minus = p.cfg();

    OpKind base = op.kind;
    if (op.use_inverse_read) base = base == OpKind::Nand ? OpKind::And : base == OpKind::Nor ? OpKind::Or : OpKind::Xnor;

    switch (base) {
        case OpKind::And:
            plan.cfg = p.cfg(0, p.steps(1, p.valley(0), Round::Nearest), 0);
            break;
        case OpKind::Or:
            plan.cfg = p.cfg(p.steps(0, p.valley(1), Round::Nearest));
            break;
        case OpKind::Xnor:
            plan.cfg = p.cfg(p.steps(0, p.valley(1), Round::Nearest), 0, p.steps(2, p.above_l3(), Round::Up));
            break;
        case OpKind::Not:
            plan.cfg = p.cfg(p.steps(0, p.valley(2), Round::Nearest), 0, p.steps(2, p.above_l3(), Round::Up));
            break;
        case OpKind::Nand:
            plan.cfg = p.cfg(p.steps(0, p.below_l0(), Round::Down), 0, p.steps(2, p.valley(0), Round::Nearest));
            break;
        case OpKind::Nor:
            plan.cfg = p.cfg(p.steps(0, p.valley(1), Round::Nearest), 0, p.steps(2, p.above_l3(), Round::Up));
            plan.cfg_minus = p.cfg(p.steps(0, p.below_l0(), Round::Down));
            break;
        case OpKind::Xor:
            plan.cfg_minus = p.cfg(p.steps(0, p.below_l0(), Round::Down), 0, p.steps(2, p.valley(1), Round::Nearest));
            break;
    }
    plan.sensing_phases = phases_of(plan.read_kind);
    plan.degraded = p.degraded();
    return plan;
}

std::string format_plan_table(const std::vector<OffsetPlan>& plans) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "op" << std::setw(6) << "read" << std::right << std::setw(8) << "VREF0"
       << std::setw(8) << "VREF1" << std::setw(8) << "VREF2" << std::setw(9) << "-VREF0" << std::setw(9) << "-VREF1"
       << std::setw(9) << "-VREF2" << std::setw(8) << "phases" << std::setw(9) << "inverse" << std::setw(10)
       << "degraded" << '\n';
    for (const auto& p : plans) {
        os << std::left << std::setw(10) << p.op.name() << std::setw(6) << to_string(p.read_kind) << std::right;
        for (int o : p.cfg.offset) os << std::setw(8) << std::showpos << o << std::noshowpos;
        for (int o : p.cfg_minus.offset) {
            if (p.read_kind == ReadKind::Sbr)
                os << std::setw(9) << std::showpos << o << std::noshowpos;
            else
                os << std::setw(9) << "-";
        }
        os << std::setw(8) << p.sensing_phases << std::setw(9) << (p.inverse ? "yes" : "no") << std::setw(10)
           << (p.degraded ? "yes" : "no") << '\n';
    }
    return os.str();
}

void write_operands(NandDevice& dev, WordlineAddr wl, const BitVector& a, const BitVector& b) {
    dev.program_wordline(wl, a, b);
}

void write_unary_operand(NandDevice& dev, WordlineAddr wl, const BitVector& m) {
    dev.program_wordline(wl, BitVector(m.size(), false), m);
}

Engine::Engine(const PhysicsParams& physics, const DeviceParams& device)
    : ctx_(PlanContext::from(device, physics)) {
    replan(physics.fresh());
}

std::size_t Engine::slot(OpCode op) noexcept {
    const auto k = static_cast<std::size_t>(op.kind);
    if (!op.use_inverse_read) return k;
    return op.kind == OpKind::Nand ? 7 : op.kind == OpKind::Nor ? 8 : 9;
}

void Engine::replan(const std::array<StateDistribution, 4>& dists) {
    for (const auto& op : all_opcodes()) plans_[slot(op)] = plan_offsets(op, dists, ctx_);
}

const OffsetPlan& Engine::plan(OpCode op) const { return plans_[slot(op)]; }

ExecResult Engine::execute(NandDevice& dev, WordlineAddr wl, OpCode op) const {
    return execute_plan(dev, wl, plan(op));
}

ExecResult execute_plan(NandDevice& dev, WordlineAddr wl, const OffsetPlan& p) {
    if (!dev.is_programmed(wl)) throw StateError("execute on an unprogrammed wordline");
    const bool clamped = dev.set_feature(p.cfg);
    const ReadRefConfig active = dev.get_feature();
    ExecResult r;
    switch (p.read_kind) {
        case ReadKind::Lsb:
        case ReadKind::Msb: {
            const PageKind kind = p.read_kind == ReadKind::Lsb ? PageKind::Lsb : PageKind::Msb;
            r.bits = p.inverse ? dev.inverse_read(wl, kind, active) : dev.read_page(wl, kind, active);
            break;
        }
        case ReadKind::Sbr:
            r.bits = dev.soft_bit_read(wl, active, p.cfg_minus);
            if (p.inverse) r.bits = ~r.bits;
            break;
    }
    r.degraded = p.degraded || clamped;
    r.sensing_phases = p.sensing_phases;
    return r;
}

AlignmentCost align_operands(NandDevice& dev, PageAddr src_a, PageAddr src_b, WordlineAddr dst) {
    if (!dev.is_writable(dst) || dev.has_staged(dst)) throw StateError("alignment destination is not erased");
    dev.copyback(src_a, PageAddr{dst, PageKind::Lsb});
    dev.copyback(src_b, PageAddr{dst, PageKind::Msb});
    return AlignmentCost{};
}

}  // namespace mcflash
