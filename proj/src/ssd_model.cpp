#include "mcflash/ssd_model.hpp"

#include <cmath>
#include <stdexcept>

#include "mcflash/errors.hpp"

namespace mcflash {

void SsdConfig::validate() const {
    if (channels == 0 || dies_per_channel == 0 || planes_per_die == 0 || page_kib == 0)
        throw ConfigError("ssd: geometry counts must be positive");
    if (!(channel_bw > 0) || !(host_bw > 0) || !(t_R_us > 0) || !(t_prog_us > 0) || !(t_setfeature_us >= 0))
        throw ConfigError("ssd: bandwidths and latencies must be positive");
    if (!(phases.t_overhead_us >= 0) || !(phases.t_phase_us > 0)) throw ConfigError("ssd: bad phase model");
    for (const auto& [name, t] : t_phase_override_us) {
        OpCode::parse(name);
        if (!(t > 0)) throw ConfigError("ssd: phase override for " + name + " must be positive");
    }
}

std::string to_string(Paradigm p) {
    switch (p) {
        case Paradigm::Osc: return "osc";
        case Paradigm::Isc: return "isc";
        case Paradigm::IfcAligned: return "ifc-aligned";
        case Paradigm::IfcNonAligned: return "ifc-nonaligned";
        case Paradigm::ParaBit: return "parabit";
        case Paradigm::FlashCosmos: return "flashcosmos";
    }
    return "?";
}

Paradigm parse_paradigm(const std::string& name) {
    for (auto p : {Paradigm::Osc, Paradigm::Isc, Paradigm::IfcAligned, Paradigm::IfcNonAligned, Paradigm::ParaBit,
                   Paradigm::FlashCosmos})
        if (to_string(p) == name) return p;
    throw std::invalid_argument("unknown paradigm: " + name);
}

void Timeline::add(std::string name, double us) {
    breakdown.push_back({std::move(name), us});
    total_us += us;
}

TransferTimes transfer_times(const SsdConfig& cfg) {
    const double page = cfg.page_bytes();
    return {1e6 * cfg.planes_per_die * page / cfg.channel_bw, 1e6 * cfg.channels * cfg.planes_per_die * page / cfg.host_bw};
}

double read_latency(OpCode op, const SsdConfig& cfg, bool opcode_switch) {
    const auto it = cfg.t_phase_override_us.find(op.name());
    const double t_phase = it != cfg.t_phase_override_us.end() ? it->second : cfg.phases.t_phase_us;
    return cfg.phases.t_overhead_us + sensing_phases(op) * t_phase + (opcode_switch ? cfg.t_setfeature_us : 0.0);
}

void ChainShape::validate() const {
    if (operands == 0) throw std::invalid_argument("chain: at least one operand");
    if (aligned_ops + nonaligned_ops != operands - 1)
        throw std::invalid_argument("chain: aligned + non-aligned ops must equal operands - 1");
}

namespace {

std::string times(double n, const std::string& term) {
    std::string c = std::to_string(static_cast<long long>(n));
    return n == 1 ? term : c + " " + term;
}

void add_host_transfer(Timeline& t, const SsdConfig& cfg, const TransferTimes& tt) {
    t.add("t_DMA", tt.t_dma_us);
    t.add(times(cfg.dies_per_channel, "t_EXT"), cfg.dies_per_channel * tt.t_ext_us);
}

double need(const std::optional<double>& v, const char* what) {
    if (!v) throw std::invalid_argument(std::string("missing baseline parameter: ") + what);
    return *v;
}

bool xor_family(const std::optional<OpCode>& op) {
    return op && (op->kind == OpKind::Xor || op->kind == OpKind::Xnor);
}

}  // namespace

Timeline chain_timeline(Paradigm p, const SsdConfig& cfg, const ChainShape& shape, const BaselineParams* baselines) {
    shape.validate();
    const auto tt = transfer_times(cfg);
    const double d = cfg.dies_per_channel;
    const double k = shape.operands;
    const double ops = shape.operands - 1;
    Timeline t;
    t.paradigm = p;
    switch (p) {
        case Paradigm::Osc:
            t.add("t_R", cfg.t_R_us);
            t.add("t_DMA", tt.t_dma_us);
            t.add(times(k * d, "t_EXT"), k * d * tt.t_ext_us);
            break;
        case Paradigm::Isc:
            t.add("t_R", cfg.t_R_us);
            t.add(times(d * ops + 1, "t_DMA"), (d * ops + 1) * tt.t_dma_us);
            t.add(times(d, "t_EXT"), d * tt.t_ext_us);
            break;
        case Paradigm::IfcAligned:
        case Paradigm::IfcNonAligned: {
            const double t_op = shape.op ? read_latency(*shape.op, cfg) : cfg.t_R_us;
            const std::string op_term = shape.op ? "t_R(" + shape.op->name() + ")" : "t_R";
            if (ops == 0) t.add("t_R", cfg.t_R_us);
            if (shape.nonaligned_ops > 0) {
                t.add(times(2.0 * shape.nonaligned_ops, "t_R"), 2.0 * shape.nonaligned_ops * cfg.t_R_us);
                t.add(times(shape.nonaligned_ops, "t_prog"), shape.nonaligned_ops * cfg.t_prog_us);
            }
            if (ops > 0) t.add(times(ops, op_term), ops * t_op);
            add_host_transfer(t, cfg, tt);
            break;
        }
        case Paradigm::ParaBit: {
            if (!baselines) throw std::invalid_argument("missing baseline parameters");
            const double op_us = need(baselines->parabit.op_us, "parabit.op_us");
            const double realloc = need(baselines->parabit.realloc_us, "parabit.realloc_us");
            if (ops == 0) t.add("t_R", cfg.t_R_us);
            if (ops > 0) {
                t.add(times(ops, "t_op(parabit)"), ops * op_us);
                t.add(times(ops, "t_realloc"), ops * realloc);
            }
            add_host_transfer(t, cfg, tt);
            t.calibrated = true;
            break;
        }
        case Paradigm::FlashCosmos: {
            if (!baselines) throw std::invalid_argument("missing baseline parameters");
            const auto& fc = baselines->flashcosmos;
            if (fc.max_operands < 2) throw std::invalid_argument("flashcosmos.max_operands must be >= 2");
            if (ops == 0) t.add("t_R", cfg.t_R_us);
            if (ops > 0 && xor_family(shape.op)) {
                t.add(times(ops, "t_xor(flashcosmos)"), ops * need(fc.xor_us, "flashcosmos.xor_us"));
            } else if (ops > 0) {
                const double passes = std::ceil(ops / (fc.max_operands - 1.0));
                t.add(times(passes, "t_mws"), passes * need(fc.mws_us, "flashcosmos.mws_us"));
            }
            add_host_transfer(t, cfg, tt);
            t.calibrated = true;
            break;
        }
    }
    return t;
}

Timeline timeline(Paradigm p, const SsdConfig& cfg, std::optional<OpCode> op) {
    switch (p) {
        case Paradigm::Osc:
        case Paradigm::Isc:
        case Paradigm::IfcAligned: return chain_timeline(p, cfg, ChainShape{2, op, 1, 0});
        case Paradigm::IfcNonAligned: return chain_timeline(p, cfg, ChainShape{2, op, 0, 1});
        default: throw std::invalid_argument("timeline: use baseline_timeline for " + to_string(p));
    }
}

Timeline baseline_timeline(Paradigm p, const SsdConfig& cfg, OpCode op, const BaselineParams& params,
                           unsigned operands) {
    if (p != Paradigm::ParaBit && p != Paradigm::FlashCosmos)
        throw std::invalid_argument("baseline_timeline: not a baseline paradigm: " + to_string(p));
    return chain_timeline(p, cfg, ChainShape{operands, op, operands - 1, 0}, &params);
}

void EnergyModel::validate() const {
    if (!(e_precharge_uj >= 0) || !(e_sense_per_phase_uj > 0) || !(e_discharge_uj >= 0) || !(e_prog_uj >= 0) ||
        align_read_phases < 1)
        throw ConfigError("energy: invalid model parameters");
}

double energy_per_kb(OpCode op, const EnergyModel& em, unsigned page_kib) {
    return em.read_energy(sensing_phases(op)) / page_kib;
}

double energy_per_kb_nonaligned(OpCode op, const EnergyModel& em, unsigned page_kib) {
    return (2.0 * em.read_energy(em.align_read_phases) + em.e_prog_uj + em.read_energy(sensing_phases(op))) /
           page_kib;
}

}  // namespace mcflash
