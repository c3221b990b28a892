#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcflash/bitvector.hpp"
#include "mcflash/cell_physics.hpp"
#include "mcflash/nand_device.hpp"

namespace mcflash {

enum class OpKind : std::uint8_t { And, Or, Xnor, Not, Nand, Nor, Xor };

inline constexpr std::array<OpKind, 7> kAllOpKinds{OpKind::And, OpKind::Or,  OpKind::Xnor, OpKind::Not,
                                                   OpKind::Nand, OpKind::Nor, OpKind::Xor};

struct OpCode {
    OpKind kind = OpKind::And;
    bool use_inverse_read = false;

    OpCode() = default;
    // The inverse-read path only exists for NAND, NOR and XOR.
    OpCode(OpKind k, bool inverse = false);

    // Accepts "and", "or", "xnor", "not", "nand", "nor", "xor" and the
    // inverse-read spellings "nand-inv", "nor-inv", "xor-inv".
    static OpCode parse(std::string_view name);
    std::string name() const;
    bool unary() const noexcept { return kind == OpKind::Not; }

    friend bool operator==(const OpCode&, const OpCode&) = default;
};

// The 10 distinct opcodes: 7 kinds plus 3 inverse-read variants.
std::vector<OpCode> all_opcodes();

// Boolean reference for a cell holding (lsb=a, msb=b). NOT ignores a.
bool host_eval(OpKind kind, bool a, bool b) noexcept;
BitVector host_apply(OpKind kind, const BitVector& a, const BitVector& b);

enum class ReadKind : std::uint8_t { Lsb, Msb, Sbr };

std::string to_string(ReadKind k);
int phases_of(ReadKind k) noexcept;

struct OffsetPlan {
    OpCode op;
    ReadKind read_kind = ReadKind::Lsb;
    ReadRefConfig cfg;        // the read's config, or cfg_plus for SBR
    ReadRefConfig cfg_minus;  // SBR only
    bool inverse = false;
    int sensing_phases = 1;
    bool degraded = false;
};

// Context the planner needs besides the distributions.
struct PlanContext {
    std::array<double, 3> default_refs{};
    double dac_step = 0.025;
    int register_width = 8;
    double k_sigma = 3.5;
    double edge_k_sigma = 3.5;

    static PlanContext from(const DeviceParams& device, const PhysicsParams& physics);
};

OffsetPlan plan_offsets(OpCode op, const std::array<StateDistribution, 4>& dists, const PlanContext& ctx);

// Phase count of the read an opcode uses; does not need distributions.
int sensing_phases(OpCode op) noexcept;
ReadKind read_kind_of(OpCode op) noexcept;

// Tabular listing of signed DAC steps per reference.
std::string format_plan_table(const std::vector<OffsetPlan>& plans);

void write_operands(NandDevice& dev, WordlineAddr wl, const BitVector& a, const BitVector& b);
// NOT setup: LSB page forced all-zero, operand on the MSB page.
void write_unary_operand(NandDevice& dev, WordlineAddr wl, const BitVector& m);

struct ExecResult {
    BitVector bits;
    bool degraded = false;
    int sensing_phases = 0;
};

struct AlignmentCost {
    int alignment_reads = 2;
    int compute_reads = 1;
    int programs = 1;

    int total_reads() const noexcept { return alignment_reads + compute_reads; }
};

// Runs an explicit plan; Engine::execute uses the cached plan for an opcode.
ExecResult execute_plan(NandDevice& dev, WordlineAddr wl, const OffsetPlan& plan);

// Caches plans built from fresh distributions. replan() is the optional
// recalibration hook for planning against worn distributions.
class Engine {
public:
    Engine(const PhysicsParams& physics, const DeviceParams& device);

    const OffsetPlan& plan(OpCode op) const;
    void replan(const std::array<StateDistribution, 4>& dists);
    const PlanContext& context() const noexcept { return ctx_; }

    ExecResult execute(NandDevice& dev, WordlineAddr wl, OpCode op) const;

private:
    static std::size_t slot(OpCode op) noexcept;

    PlanContext ctx_;
    std::array<OffsetPlan, 10> plans_;
};

AlignmentCost align_operands(NandDevice& dev, PageAddr src_a, PageAddr src_b, WordlineAddr dst);

}  // namespace mcflash
