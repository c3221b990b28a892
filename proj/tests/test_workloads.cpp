#include <doctest.h>

#include <algorithm>

#include "mcflash/errors.hpp"
#include "mcflash/workloads.hpp"

using namespace mcflash;

namespace {

const SimConfig& cfg() { return default_config(); }

WorkloadResult run(WorkloadKind k, double scale, bool check = false) {
    return run_workload(WorkloadSpec{k, scale, std::nullopt, check, 3}, cfg());
}

}  // namespace

// Speedups and stripe counts computed independently from the timing formulas.
TEST_CASE("segmentation") {
    const auto r = run(WorkloadKind::Segmentation, 10000);
    CHECK(r.operands == 3);
    CHECK(r.mcflash_shape.aligned_ops == 2);
    CHECK(r.stripes == doctest::Approx(286.102294921875));
    CHECK(r.speedup.at("osc") == doctest::Approx(2.745603334499311));
    CHECK(r.speedup.at("isc") == doctest::Approx(1.7167997742511047));
    CHECK(r.baselines_calibrated);
}

TEST_CASE("encryption") {
    const auto r = run(WorkloadKind::Encryption, 5000);
    CHECK(r.operands == 2);
    CHECK(r.mcflash_shape.op->name() == "xor-inv");
    CHECK(r.speedup.at("osc") == doctest::Approx(1.7832580063617778));
    CHECK(r.speedup.at("isc") == doctest::Approx(1.2910780428674686));
}

TEST_CASE("bitmap index") {
    const auto r = run(WorkloadKind::Bitmap, 1);
    CHECK(r.operands == 30);
    CHECK(r.mcflash_shape.aligned_ops == 1);
    CHECK(r.mcflash_shape.nonaligned_ops == 28);
    CHECK(r.stripes == doctest::Approx(11.920928955078125));
    CHECK(r.speedup.at("osc") == doctest::Approx(1.3159340487265425));
    CHECK(r.speedup.at("isc") == doctest::Approx(0.576690838584388));
}

TEST_CASE("a one-day bitmap query is a single read") {
    const auto r = run_workload(WorkloadSpec{WorkloadKind::Bitmap, 1, 1u, true, 3}, cfg());
    CHECK(r.operands == 1);
    CHECK(r.mcflash_shape.aligned_ops + r.mcflash_shape.nonaligned_ops == 0);
    CHECK(r.mismatches == 0);
    CHECK(r.bits_checked > 0);
    CHECK_THROWS_AS(run_workload(WorkloadSpec{WorkloadKind::Bitmap, 1, 0u, false, 3}, cfg()), RangeError);
}

TEST_CASE("functional checks run the chains on the device model") {
    for (auto k : {WorkloadKind::Segmentation, WorkloadKind::Encryption}) {
        const auto r = run(k, default_scale_points(k, cfg()).front(), true);
        CHECK(r.functional_checked);
        CHECK(r.bits_checked > 0);
        CHECK(r.mismatches == 0);
    }
    const auto b = run_workload(WorkloadSpec{WorkloadKind::Bitmap, 1, 5u, true, 3}, cfg());
    CHECK(b.mismatches == 0);
    CHECK(b.bits_checked == 2ull * 8192);
}

TEST_CASE("scales outside the studied range are rejected") {
    CHECK_THROWS_AS(run(WorkloadKind::Segmentation, 500), RangeError);
    CHECK_THROWS_AS(run(WorkloadKind::Encryption, 1e6), RangeError);
    CHECK_THROWS_AS(run(WorkloadKind::Bitmap, 13), RangeError);
}

TEST_CASE("speedups do not depend on the data volume") {
    for (auto k : {WorkloadKind::Segmentation, WorkloadKind::Encryption}) {
        const auto s = run_sweep(k, default_scale_points(k, cfg()), cfg(), false, 1);
        for (const auto& p : s.points)
            CHECK(p.speedup.at("osc") == doctest::Approx(s.points.front().speedup.at("osc")).epsilon(1e-12));
    }
    // Bitmap chains grow with the month count; the ratio drifts by a few percent.
    const auto s = run_sweep(WorkloadKind::Bitmap, default_scale_points(WorkloadKind::Bitmap, cfg()), cfg(), false, 1);
    double lo = 1e9, hi = 0.0;
    for (const auto& p : s.points) {
        lo = std::min(lo, p.speedup.at("osc"));
        hi = std::max(hi, p.speedup.at("osc"));
    }
    CHECK(hi / lo - 1.0 < 0.025);
}

TEST_CASE("sweep means are arithmetic means") {
    const auto s = run_sweep(WorkloadKind::Bitmap, {1, 2}, cfg(), false, 1);
    CHECK(s.mean_speedup.at("osc") ==
          doctest::Approx((s.points[0].speedup.at("osc") + s.points[1].speedup.at("osc")) / 2));
    CHECK_THROWS_AS(run_sweep(WorkloadKind::Bitmap, {}, cfg(), false, 1), std::invalid_argument);
}

TEST_CASE("missing baseline parameters leave those columns out") {
    SimConfig c = cfg();
    c.baselines = BaselineParams{};
    const auto r = run_workload(WorkloadSpec{WorkloadKind::Encryption, 5000, std::nullopt, false, 1}, c);
    CHECK_FALSE(r.baselines_calibrated);
    CHECK(r.speedup.count("parabit") == 0);
    CHECK(r.speedup.count("osc") == 1);
}

TEST_CASE("baseline fit is deterministic and respects the sensing floor") {
    const auto a = calibrate_baselines(cfg());
    const auto b = calibrate_baselines(cfg());
    CHECK(*a.params.parabit.realloc_us == *b.params.parabit.realloc_us);
    CHECK(*a.params.flashcosmos.mws_us == *b.params.flashcosmos.mws_us);
    CHECK(*a.params.flashcosmos.mws_us >= cfg().ssd.t_R_us);
    CHECK(*a.params.flashcosmos.xor_us >= cfg().ssd.t_R_us);
    CHECK(*a.params.parabit.realloc_us == doctest::Approx(*cfg().baselines.parabit.realloc_us).epsilon(1e-4));
    CHECK(*a.params.flashcosmos.mws_us == doctest::Approx(*cfg().baselines.flashcosmos.mws_us).epsilon(1e-4));
}

TEST_CASE("workload names") {
    CHECK(parse_workload("bitmap") == WorkloadKind::Bitmap);
    CHECK(to_string(WorkloadKind::Encryption) == "encryption");
    CHECK_THROWS_AS(parse_workload("video"), std::invalid_argument);
}
