#include <doctest.h>

#include "mcflash/errors.hpp"
#include "mcflash/mcflash_engine.hpp"
#include "support.hpp"

using namespace mcflash;
using mcflash::test::make_device;
using mcflash::test::small_device;

namespace {

using Offsets = std::array<int, 3>;

const Engine& engine() {
    static const Engine e(default_config().physics, default_config().device);
    return e;
}

}  // namespace

TEST_CASE("opcode names") {
    CHECK(OpCode::parse("AND") == OpCode(OpKind::And));
    CHECK(OpCode::parse("xor-inv") == OpCode(OpKind::Xor, true));
    CHECK(OpCode(OpKind::Nor, true).name() == "nor-inv");
    CHECK_THROWS_AS(OpCode::parse("and-inv"), std::invalid_argument);
    CHECK_THROWS_AS(OpCode::parse("nandd"), std::invalid_argument);
    CHECK_THROWS_AS(OpCode(OpKind::Or, true), std::invalid_argument);
    CHECK(all_opcodes().size() == 10);
    CHECK(OpCode::parse("not").unary());
}

TEST_CASE("host boolean reference") {
    CHECK(host_eval(OpKind::And, 1, 1));
    CHECK_FALSE(host_eval(OpKind::And, 1, 0));
    CHECK(host_eval(OpKind::Or, 0, 1));
    CHECK(host_eval(OpKind::Xnor, 0, 0));
    CHECK_FALSE(host_eval(OpKind::Xnor, 1, 0));
    CHECK(host_eval(OpKind::Not, 1, 0));
    CHECK_FALSE(host_eval(OpKind::Nand, 1, 1));
    CHECK(host_eval(OpKind::Nor, 0, 0));
    CHECK(host_eval(OpKind::Xor, 0, 1));
    const auto a = BitVector::from_string("0011"), b = BitVector::from_string("0101");
    CHECK(host_apply(OpKind::Xnor, a, b) == BitVector::from_string("1001"));
    CHECK(host_apply(OpKind::Not, a, b) == BitVector::from_string("1010"));
}

TEST_CASE("sensing phases per read kind") {
    CHECK(sensing_phases(OpCode(OpKind::And)) == 1);
    CHECK(sensing_phases(OpCode(OpKind::Or)) == 2);
    CHECK(sensing_phases(OpCode(OpKind::Not)) == 2);
    CHECK(sensing_phases(OpCode(OpKind::Xnor)) == 4);
    CHECK(sensing_phases(OpCode(OpKind::Xor, true)) == 4);
    CHECK(read_kind_of(OpCode(OpKind::Nand, true)) == ReadKind::Lsb);
}

// Offsets computed independently from the valley and edge rules.
TEST_CASE("offset plans of the default device") {
    struct Row {
        const char* op;
        ReadKind kind;
        Offsets cfg;
        Offsets minus;
        bool inverse;
        bool degraded;
    };
    const Row rows[] = {
        {"and", ReadKind::Lsb, {0, -88, 0}, {0, 0, 0}, false, false},
        {"or", ReadKind::Msb, {88, 0, 0}, {0, 0, 0}, false, false},
        {"xnor", ReadKind::Sbr, {88, 0, 39}, {0, 0, 0}, false, false},
        {"not", ReadKind::Msb, {125, 0, 39}, {0, 0, 0}, false, false},
        {"nand", ReadKind::Msb, {-128, 0, -125}, {0, 0, 0}, false, true},
        {"nand-inv", ReadKind::Lsb, {0, -88, 0}, {0, 0, 0}, true, false},
        {"nor-inv", ReadKind::Msb, {88, 0, 0}, {0, 0, 0}, true, false},
        {"xor-inv", ReadKind::Sbr, {88, 0, 39}, {0, 0, 0}, true, false},
    };
    for (const auto& r : rows) {
        CAPTURE(r.op);
        const auto& p = engine().plan(OpCode::parse(r.op));
        CHECK(p.read_kind == r.kind);
        CHECK(p.cfg.offset == r.cfg);
        if (r.kind == ReadKind::Sbr) CHECK(p.cfg_minus.offset == r.minus);
        CHECK(p.inverse == r.inverse);
        CHECK(p.degraded == r.degraded);
    }
    CHECK(engine().plan(OpCode::parse("nor")).degraded);
    CHECK(engine().plan(OpCode::parse("xor")).degraded);
}

TEST_CASE("a wider register removes the clamp") {
    DeviceParams d = default_config().device;
    d.register_width = 10;
    const Engine wide(default_config().physics, d);
    const auto& p = wide.plan(OpCode(OpKind::Nand));
    CHECK(p.cfg.offset == Offsets{-272, 0, -125});
    CHECK_FALSE(p.degraded);
}

TEST_CASE("plan table lists every opcode") {
    std::vector<OffsetPlan> plans;
    for (const auto& op : all_opcodes()) plans.push_back(engine().plan(op));
    const auto t = format_plan_table(plans);
    for (const auto& op : all_opcodes()) CHECK(t.find(op.name()) != std::string::npos);
}

TEST_CASE("execute matches the boolean reference on fresh pages") {
    auto dev = make_device(3, 1, 16, 2048);
    const Engine eng(dev.physics(), dev.params());
    std::mt19937_64 rng(9);
    std::uint32_t w = 0;
    for (const char* name : {"and", "or", "xnor", "not", "nand-inv", "nor-inv", "xor-inv"}) {
        const OpCode op = OpCode::parse(name);
        const auto a = BitVector::random(dev.page_bits(), rng);
        const auto b = BitVector::random(dev.page_bits(), rng);
        if (op.unary())
            write_unary_operand(dev, {0, w}, b);
        else
            write_operands(dev, {0, w}, a, b);
        const auto r = eng.execute(dev, {0, w}, op);
        CAPTURE(name);
        CHECK(r.bits == host_apply(op.kind, a, b));
        CHECK(r.sensing_phases == sensing_phases(op));
        CHECK_FALSE(r.degraded);
        ++w;
    }
}

TEST_CASE("execute loads the plan through set_feature") {
    auto dev = make_device();
    const Engine eng(dev.physics(), dev.params());
    write_operands(dev, {0, 0}, BitVector(dev.page_bits(), true), BitVector(dev.page_bits(), false));
    eng.execute(dev, {0, 0}, OpCode(OpKind::And));
    CHECK(dev.get_feature().offset == Offsets{0, -88, 0});
    CHECK(dev.counters().feature_switches == 1);
}

TEST_CASE("execute requires a programmed wordline") {
    auto dev = make_device();
    CHECK_THROWS_AS(engine().execute(dev, {0, 0}, OpCode(OpKind::Or)), StateError);
}

TEST_CASE("explicit plans can be executed and rejected when out of range") {
    auto params = small_device();
    params.offset_policy = OffsetPolicy::Error;
    NandDevice dev(params, default_config().physics, 5);
    write_operands(dev, {0, 0}, BitVector(dev.page_bits(), true), BitVector(dev.page_bits(), true));
    OffsetPlan p = engine().plan(OpCode(OpKind::And));
    CHECK(execute_plan(dev, {0, 0}, p).bits.all());
    p.cfg.offset[1] = 400;
    CHECK_THROWS_AS(execute_plan(dev, {0, 0}, p), RangeError);
}

TEST_CASE("alignment moves operands from two wordlines into one") {
    auto dev = make_device(4, 1, 8, 1024);
    const Engine eng(dev.physics(), dev.params());
    std::mt19937_64 rng(2);
    const auto a = BitVector::random(dev.page_bits(), rng);
    const auto b = BitVector::random(dev.page_bits(), rng);
    const auto x = BitVector::random(dev.page_bits(), rng);
    dev.program_wordline({0, 0}, a, x);
    dev.program_wordline({0, 1}, x, b);
    const auto cost = align_operands(dev, {{0, 0}, PageKind::Lsb}, {{0, 1}, PageKind::Msb}, {0, 2});
    CHECK(cost.alignment_reads == 2);
    CHECK(cost.compute_reads == 1);
    CHECK(cost.programs == 1);
    CHECK(cost.total_reads() == 3);
    CHECK(eng.execute(dev, {0, 2}, OpCode(OpKind::And)).bits == (a & b));
    CHECK_THROWS_AS(align_operands(dev, {{0, 0}, PageKind::Lsb}, {{0, 1}, PageKind::Msb}, {0, 2}), StateError);
}

TEST_CASE("replanning against worn distributions") {
    Engine eng(default_config().physics, default_config().device);
    const auto worn = distributions({6000, 0.0}, default_config().physics);
    eng.replan(worn);
    const auto& p = eng.plan(OpCode(OpKind::And));
    CHECK(p.read_kind == ReadKind::Lsb);
    CHECK(p.cfg.offset[1] != 0);
    CHECK(plan_offsets(OpCode(OpKind::And), worn, eng.context()).cfg == p.cfg);
}
