#include <doctest.h>

#include <cmath>
#include <random>

#include "mcflash/reliability_lab.hpp"
#include "mcflash/ssd_model.hpp"
#include "mcflash/workloads.hpp"
#include "support.hpp"

using namespace mcflash;
using mcflash::test::make_device;
using mcflash::test::small_device;

namespace {

const SimConfig& cfg() { return default_config(); }

ReadRefConfig random_cfg(std::mt19937_64& rng, const DeviceParams& d) {
    ReadRefConfig c = d.default_config();
    std::uniform_int_distribution<int> off(c.min_offset(), c.max_offset());
    for (auto& o : c.offset) o = off(rng);
    return c;
}

double analytic(const char* op, WearState w) {
    static const Engine e(cfg().physics, cfg().device);
    return expected_rber(e.plan(OpCode::parse(op)), distributions(w, cfg().physics), cfg().device.default_refs);
}

}  // namespace

TEST_CASE("soft-bit read equals XNOR of its two reads for random configurations") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> pe(0, 12000);
    for (int trial = 0; trial < 100; ++trial) {
        auto dev = make_device(trial, 1, 1, 512);
        if (const int n = pe(rng)) cycle_block(dev, 0, n);
        dev.program_wordline({0, 0}, BitVector::random(dev.page_bits(), rng), BitVector::random(dev.page_bits(), rng));
        const auto plus = random_cfg(rng, dev.params());
        const auto minus = random_cfg(rng, dev.params());
        const auto a = dev.read_page({0, 0}, PageKind::Msb, minus);
        const auto b = dev.read_page({0, 0}, PageKind::Msb, plus);
        REQUIRE(dev.soft_bit_read({0, 0}, plus, minus) == ~(a ^ b));
    }
}

TEST_CASE("inverse read is the exact complement for random configurations") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        auto dev = make_device(trial + 1000, 1, 1, 512);
        dev.program_wordline({0, 0}, BitVector::random(dev.page_bits(), rng), BitVector::random(dev.page_bits(), rng));
        const auto c = random_cfg(rng, dev.params());
        const auto kind = trial % 2 ? PageKind::Lsb : PageKind::Msb;
        REQUIRE(dev.inverse_read({0, 0}, kind, c) == ~dev.read_page({0, 0}, kind, c));
    }
}

TEST_CASE("execute never disturbs stored operands") {
    auto dev = make_device(5, 1, 4, 4096);
    const Engine eng(dev.physics(), dev.params());
    std::mt19937_64 rng(8);
    cycle_block(dev, 0, 3000);
    dev.program_wordline({0, 0}, BitVector::random(dev.page_bits(), rng), BitVector::random(dev.page_bits(), rng));
    const auto before = dev.image({0, 0});
    const auto cfg0 = dev.params().default_config();
    const auto lsb0 = dev.read_page({0, 0}, PageKind::Lsb, cfg0);
    const auto msb0 = dev.read_page({0, 0}, PageKind::Msb, cfg0);
    std::vector<BitVector> first;
    for (int rep = 0; rep < 5; ++rep) {
        for (std::size_t i = 0; i < all_opcodes().size(); ++i) {
            const auto r = eng.execute(dev, {0, 0}, all_opcodes()[i]).bits;
            if (rep == 0)
                first.push_back(r);
            else
                REQUIRE(r == first[i]);
        }
    }
    const auto& after = dev.image({0, 0});
    CHECK(after.vth == before.vth);
    CHECK(after.states == before.states);
    CHECK(dev.read_page({0, 0}, PageKind::Lsb, cfg0) == lsb0);
    CHECK(dev.read_page({0, 0}, PageKind::Msb, cfg0) == msb0);
}

TEST_CASE("every opcode decodes every level exactly on a fresh page") {
    for (int width : {8, 10}) {
        DeviceParams d = small_device(1, 1, 1024);
        d.register_width = width;
        const Engine eng(cfg().physics, d);
        for (const auto& op : all_opcodes()) {
            if (width == 8 && !op.use_inverse_read &&
                (op.kind == OpKind::Nand || op.kind == OpKind::Nor || op.kind == OpKind::Xor))
                continue;  // these need the wider register
            NandDevice dev(d, cfg().physics, 13);
            const std::size_t n = dev.page_bits();
            BitVector lsb(n), msb(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto s = CellState::from_level(op.unary() ? (i % 2 ? Level::L3 : Level::L2)
                                                                : static_cast<Level>(i % 4));
                lsb.set(i, s.lsb);
                msb.set(i, s.msb);
            }
            dev.program_wordline({0, 0}, lsb, msb);
            const auto r = eng.execute(dev, {0, 0}, op);
            CAPTURE(op.name());
            CAPTURE(width);
            CHECK_FALSE(r.degraded);
            CHECK(r.bits == host_apply(op.kind, lsb, msb));
        }
    }
}

TEST_CASE("expected RBER never decreases with cycling or retention") {
    for (const char* op : {"and", "or", "xnor", "not"}) {
        double prev = 0.0;
        for (std::uint64_t pe = 0; pe <= 12000; pe += 250) {
            const double r = analytic(op, {pe, 24.0});
            CHECK(r >= prev);
            prev = r;
        }
        prev = 0.0;
        for (double h = 0.0; h <= 1000.0; h += 10.0) {
            const double r = analytic(op, {1500, h});
            CHECK(r >= prev);
            prev = r;
        }
    }
}

TEST_CASE("error ordering under retention") {
    for (double h : {1.0, 24.0, 168.0, 720.0}) {
        CAPTURE(h);
        CHECK(analytic("and", {1500, h}) <= analytic("or", {1500, h}));
        CHECK(analytic("or", {1500, h}) <= analytic("xnor", {1500, h}));
        CHECK(analytic("not", {1500, h}) > analytic("and", {1500, h}));
    }
}

TEST_CASE("measured RBER grows with cumulative bakes") {
    auto dev = make_device(31, 1, 8, 16384);
    cycle_block(dev, 0, 1500);
    const Engine eng(dev.physics(), dev.params());
    std::mt19937_64 rng(1);
    const auto pages = prepare_pages(dev, OpCode(OpKind::Xnor), 8, rng);
    std::uint64_t prev = evaluate_pages(dev, eng, pages).mismatches;
    for (int step = 0; step < 4; ++step) {
        retention_bake(dev, 0, 48.0);
        const auto m = evaluate_pages(dev, eng, pages).mismatches;
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("mismatch positions are spatially uniform on worn pages") {
    auto dev = make_device(41, 1, 16, 16384);
    cycle_block(dev, 0, 6000);
    const Engine eng(dev.physics(), dev.params());
    std::mt19937_64 rng(2);
    constexpr std::size_t kBins = 16;
    std::array<double, kBins> counts{};
    const std::size_t span = dev.page_bits() / kBins;
    measure_rber(dev, eng, OpCode(OpKind::Xnor), 16, rng, [&](const BitVector& diff) {
        for (std::size_t i = 0; i < diff.size(); ++i)
            if (diff.get(i)) counts[i / span] += 1.0;
    });
    double total = 0.0;
    for (double c : counts) total += c;
    REQUIRE(total > 20.0 * kBins);
    const double e = total / kBins;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - e) * (c - e) / e;
    // Critical value of chi-squared with 15 degrees of freedom at p = 0.01.
    CHECK(chi2 < 30.578);
}

TEST_CASE("zero window narrows as wear grows") {
    int prev = 1 << 20;
    for (std::uint64_t pe : {0ull, 1500ull, 3000ull, 6000ull, 10000ull}) {
        auto dev = make_device(50, 1, 2, 16384);
        if (pe) cycle_block(dev, 0, pe);
        const Engine eng(dev.physics(), dev.params());
        std::mt19937_64 rng(3);
        const auto c = sweep_offset(dev, eng, OpCode(OpKind::Or), {0, false}, -128, 127, 1, 2, rng);
        CAPTURE(pe);
        CHECK(c.window_width() <= prev);
        prev = c.window_width();
    }
    CHECK(prev == 0);
}

TEST_CASE("same seed, same result") {
    auto run = [](std::uint64_t seed) {
        auto dev = make_device(seed, 1, 4, 4096);
        cycle_block(dev, 0, 8000);
        const Engine eng(dev.physics(), dev.params());
        std::mt19937_64 rng(seed);
        std::vector<BitVector> diffs;
        measure_rber(dev, eng, OpCode(OpKind::Or), 4, rng, [&](const BitVector& d) { diffs.push_back(d); });
        return diffs;
    };
    CHECK(run(9) == run(9));
    CHECK(run(9) != run(10));
    const WorkloadSpec spec{WorkloadKind::Bitmap, 1, 7u, true, 4};
    const auto a = run_workload(spec, cfg());
    const auto b = run_workload(spec, cfg());
    CHECK(a.total_us == b.total_us);
    CHECK(a.bits_checked == b.bits_checked);
}

TEST_CASE("timeline identities over operand counts") {
    const auto& ssd = cfg().ssd;
    const auto tt = transfer_times(ssd);
    const double d = ssd.dies_per_channel;
    for (unsigned k = 2; k <= 64; ++k) {
        const ChainShape s{k, OpCode(OpKind::And), k - 1, 0};
        const double osc = chain_timeline(Paradigm::Osc, ssd, s).total_us;
        const double isc = chain_timeline(Paradigm::Isc, ssd, s).total_us;
        const double ifc = chain_timeline(Paradigm::IfcAligned, ssd, s).total_us;
        CHECK(osc - isc == doctest::Approx((k - 1) * d * (tt.t_ext_us - tt.t_dma_us)));
        CHECK(ifc < isc);
        CHECK(isc < osc);
        const ChainShape na{k, OpCode(OpKind::And), 1, k - 2};
        const double ifc_na = chain_timeline(Paradigm::IfcNonAligned, ssd, na).total_us;
        CHECK(ifc_na - ifc == doctest::Approx((k - 2) * (2 * ssd.t_R_us + ssd.t_prog_us)));
    }
}
