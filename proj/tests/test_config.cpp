#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "mcflash/config.hpp"
#include "mcflash/errors.hpp"

using namespace mcflash;

TEST_CASE("shipped defaults") {
    const auto& c = default_config();
    CHECK(c.device.geometry.page_size_bytes == 16384);
    CHECK(c.device.register_width == 8);
    CHECK(c.device.offset_policy == OffsetPolicy::ClampAndFlag);
    CHECK(c.ssd.total_planes() == 512);
    CHECK(c.calibration.targets.size() == 4);
    CHECK(c.calibration.pe_cycles == 1500);
    CHECK(c.workloads.bitmap.days_per_month == 30);
    CHECK(std::string(tool_version()) == "0.1.0");
}

TEST_CASE("json round trip preserves every value") {
    const auto j = config_to_json(default_config());
    const auto back = config_from_json(j);
    CHECK(config_to_json(back) == j);
}

TEST_CASE("file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "mcflash_cfg_roundtrip.json";
    save_config(default_config(), path.string());
    const auto c = load_config(path.string());
    CHECK(config_to_json(c) == config_to_json(default_config()));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config("/nonexistent/mcflash.json"), ConfigError);
}

TEST_CASE("unknown keys and bad values are rejected") {
    auto j = config_to_json(default_config());
    j["device"]["bogus"] = 1;
    CHECK_THROWS_AS(config_from_json(j), ConfigError);

    j = config_to_json(default_config());
    j["device"]["offset_policy"] = "wrap";
    CHECK_THROWS_AS(config_from_json(j), ConfigError);

    j = config_to_json(default_config());
    j["cell_physics"]["mean0_v"] = {1, 2, 3};
    CHECK_THROWS_AS(config_from_json(j), ConfigError);

    j = config_to_json(default_config());
    j["ssd"]["channels"] = "sixteen";
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("baseline parameters may be omitted") {
    auto j = config_to_json(default_config());
    j["baselines"]["parabit"].erase("realloc_us");
    const auto c = config_from_json(j);
    CHECK_FALSE(c.baselines.parabit.realloc_us.has_value());
    CHECK(c.baselines.parabit.op_us.has_value());
}
