#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcflash/mcflash_engine.hpp"

namespace mcflash {

struct PhaseModel {
    double t_overhead_us = 10.0;
    double t_phase_us = 30.0;
};

struct SsdConfig {
    unsigned channels = 16;
    unsigned dies_per_channel = 8;
    unsigned planes_per_die = 4;
    unsigned page_kib = 16;
    double channel_bw = 1.2 * 1073741824.0;  // bytes/s
    double host_bw = 8.0 * 1073741824.0;     // bytes/s
    double t_R_us = 60.0;
    double t_prog_us = 600.0;
    double t_setfeature_us = 10.0;
    PhaseModel phases;
    // Optional per-opcode replacement for t_phase_us, keyed by OpCode::name().
    std::map<std::string, double> t_phase_override_us;

    unsigned total_planes() const noexcept { return channels * dies_per_channel * planes_per_die; }
    double page_bytes() const noexcept { return page_kib * 1024.0; }
    void validate() const;
};

enum class Paradigm : std::uint8_t { Osc, Isc, IfcAligned, IfcNonAligned, ParaBit, FlashCosmos };

std::string to_string(Paradigm p);
Paradigm parse_paradigm(const std::string& name);

struct TimelinePhase {
    std::string name;
    double us = 0.0;
};

struct Timeline {
    Paradigm paradigm = Paradigm::Osc;
    double total_us = 0.0;
    std::vector<TimelinePhase> breakdown;
    bool calibrated = false;  // built from fitted baseline parameters

    void add(std::string name, double us);
};

struct TransferTimes {
    double t_dma_us = 0.0;
    double t_ext_us = 0.0;
};

TransferTimes transfer_times(const SsdConfig& cfg);

double read_latency(OpCode op, const SsdConfig& cfg, bool opcode_switch = false);

// One result stripe (one page per plane) produced from `operands` input
// stripes by a chain of two-input operations. aligned_ops + nonaligned_ops
// must equal operands - 1.
struct ChainShape {
    unsigned operands = 2;
    std::optional<OpCode> op;  // empty: the compute read costs the generic t_R
    unsigned aligned_ops = 1;
    unsigned nonaligned_ops = 0;

    void validate() const;
};

struct ParaBitParams {
    std::optional<double> op_us;       // in-flash latch-sequenced op per operand pair
    std::optional<double> realloc_us;  // DRAM-buffer reallocation per op
};

struct FlashCosmosParams {
    std::optional<double> mws_us;  // one multi-wordline sensing (AND/OR family)
    std::optional<double> xor_us;  // one XOR/XNOR pass
    unsigned max_operands = 16;
};

struct BaselineParams {
    ParaBitParams parabit;
    FlashCosmosParams flashcosmos;
};

Timeline chain_timeline(Paradigm p, const SsdConfig& cfg, const ChainShape& shape, const BaselineParams* baselines = nullptr);

// Two-operand scenario of one 8 MiB vector per operand across all planes.
Timeline timeline(Paradigm p, const SsdConfig& cfg, std::optional<OpCode> op = std::nullopt);

Timeline baseline_timeline(Paradigm p, const SsdConfig& cfg, OpCode op, const BaselineParams& params,
                           unsigned operands = 2);

struct EnergyModel {
    double e_precharge_uj = 1.50;
    double e_sense_per_phase_uj = 0.51;
    double e_discharge_uj = 0.99;
    double e_prog_uj = 45.0;
    // Phases charged per alignment read on the non-aligned path.
    int align_read_phases = 2;

    double read_energy(int phases) const noexcept {
        return e_precharge_uj + phases * e_sense_per_phase_uj + e_discharge_uj;
    }
    void validate() const;
};

double energy_per_kb(OpCode op, const EnergyModel& em, unsigned page_kib = 16);
double energy_per_kb_nonaligned(OpCode op, const EnergyModel& em, unsigned page_kib = 16);

}  // namespace mcflash
