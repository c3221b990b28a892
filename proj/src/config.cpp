#include "mcflash/config.hpp"

#include <fstream>
#include <sstream>

#include "mcflash/default_config.hpp"
#include "mcflash/errors.hpp"

namespace mcflash {

using nlohmann::json;

namespace {

template <typename T, std::size_t N>
std::array<T, N> arr(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != N)
        throw ConfigError(std::string("config: '") + key + "' must be an array of " + std::to_string(N));
    std::array<T, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = v[i].get<T>();
    return out;
}

json speedups_to_json(const SpeedupTargets& s) {
    return {{"osc", s.osc}, {"isc", s.isc}, {"parabit", s.parabit}, {"flashcosmos", s.flashcosmos}};
}

SpeedupTargets speedups_from_json(const json& j) {
    return {j.at("osc").get<double>(), j.at("isc").get<double>(), j.at("parabit").get<double>(),
            j.at("flashcosmos").get<double>()};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

// Every key in the input must be one the serializer would write back.
void reject_unknown_keys(const json& in, const json& known, const std::string& path) {
    if (!in.is_object() || !known.is_object()) return;
    for (const auto& [k, v] : in.items()) {
        const auto it = known.find(k);
        if (it == known.end()) throw ConfigError("config: unknown key " + path + "/" + k);
        reject_unknown_keys(v, *it, path + "/" + k);
    }
}

}  // namespace

void SimConfig::validate() const {
    physics.validate();
    device.validate();
    calibration.validate();
    ssd.validate();
    energy.validate();
    if (workloads.functional_wordlines == 0) throw ConfigError("workloads: functional_wordlines must be >= 1");
}

SimConfig config_from_json(const json& j) {
    try {
        SimConfig c;
        const auto& cp = j.at("cell_physics");
        c.physics.mean0 = arr<double, 4>(cp, "mean0_v");
        c.physics.sigma0 = arr<double, 4>(cp, "sigma0_v");
        c.physics.k_sigma = cp.at("k_sigma").get<double>();
        c.physics.edge_k_sigma = cp.at("edge_k_sigma").get<double>();
        const auto& w = cp.at("wear");
        c.physics.wear.sigma_coeff = arr<double, 4>(w, "sigma_coeff");
        c.physics.wear.sigma_exponent = arr<double, 4>(w, "sigma_exponent");
        c.physics.wear.pe_scale = w.at("pe_scale").get<double>();
        c.physics.wear.retention_shift = arr<double, 4>(w, "retention_shift_v");
        c.physics.wear.retention_timescale_hours = w.at("retention_timescale_hours").get<double>();

        const auto& d = j.at("device");
        c.device.geometry.blocks_per_plane = d.at("blocks_per_plane").get<std::uint32_t>();
        c.device.geometry.wordlines_per_block = d.at("wordlines_per_block").get<std::uint32_t>();
        c.device.geometry.page_size_bytes = d.at("page_size_bytes").get<std::uint32_t>();
        c.device.default_refs = arr<double, 3>(d, "default_refs_v");
        c.device.dac_step = d.at("dac_step_v").get<double>();
        c.device.register_width = d.at("register_width_bits").get<int>();
        const auto policy = d.at("offset_policy").get<std::string>();
        if (policy == "error")
            c.device.offset_policy = OffsetPolicy::Error;
        else if (policy == "clamp-and-flag")
            c.device.offset_policy = OffsetPolicy::ClampAndFlag;
        else
            throw ConfigError("config: offset_policy must be 'error' or 'clamp-and-flag'");

        const auto& cal = j.at("calibration");
        c.calibration.pe_cycles = cal.at("pe_cycles").get<std::uint64_t>();
        c.calibration.retention_hours = cal.at("retention_hours").get<double>();
        c.calibration.heavy_pe_cycles = cal.at("heavy_pe_cycles").get<std::uint64_t>();
        c.calibration.band_margin = cal.at("band_margin").get<double>();
        c.calibration.sigma_exponent = cal.at("sigma_exponent").get<double>();
        c.calibration.coeff_min = cal.at("coeff_min").get<double>();
        c.calibration.coeff_max = cal.at("coeff_max").get<double>();
        c.calibration.fresh_bits = cal.at("fresh_pages").get<double>() * c.device.geometry.cells_per_wordline();
        c.calibration.fresh_max_expected_mismatches = cal.at("fresh_max_expected_mismatches").get<double>();
        for (const auto& t : cal.at("targets")) {
            const auto band = arr<double, 2>(t, "band_percent");
            c.calibration.targets.push_back(
                {OpCode::parse(t.at("op").get<std::string>()), t.at("target_percent").get<double>(), band[0], band[1]});
        }

        const auto& s = j.at("ssd");
        c.ssd.channels = s.at("channels").get<unsigned>();
        c.ssd.dies_per_channel = s.at("dies_per_channel").get<unsigned>();
        c.ssd.planes_per_die = s.at("planes_per_die").get<unsigned>();
        c.ssd.page_kib = s.at("page_kib").get<unsigned>();
        c.ssd.channel_bw = s.at("channel_bw_gib_s").get<double>() * 1073741824.0;
        c.ssd.host_bw = s.at("host_bw_gib_s").get<double>() * 1073741824.0;
        c.ssd.t_R_us = s.at("t_R_us").get<double>();
        c.ssd.t_prog_us = s.at("t_prog_us").get<double>();
        c.ssd.t_setfeature_us = s.at("t_setfeature_us").get<double>();
        c.ssd.phases.t_overhead_us = s.at("phase_model").at("t_overhead_us").get<double>();
        c.ssd.phases.t_phase_us = s.at("phase_model").at("t_phase_us").get<double>();
        for (const auto& [k, v] : s.at("t_phase_override_us").items()) c.ssd.t_phase_override_us[k] = v.get<double>();

        const auto& e = j.at("energy");
        c.energy.e_precharge_uj = e.at("e_precharge_uj").get<double>();
        c.energy.e_sense_per_phase_uj = e.at("e_sense_per_phase_uj").get<double>();
        c.energy.e_discharge_uj = e.at("e_discharge_uj").get<double>();
        c.energy.e_prog_uj = e.at("e_prog_uj").get<double>();
        c.energy.align_read_phases = e.at("align_read_phases").get<int>();

        const auto& b = j.at("baselines");
        c.baselines.parabit.op_us = optional_from(b.at("parabit"), "op_us");
        c.baselines.parabit.realloc_us = optional_from(b.at("parabit"), "realloc_us");
        c.baselines.flashcosmos.mws_us = optional_from(b.at("flashcosmos"), "mws_us");
        c.baselines.flashcosmos.xor_us = optional_from(b.at("flashcosmos"), "xor_us");
        c.baselines.flashcosmos.max_operands = b.at("flashcosmos").at("max_operands").get<unsigned>();

        const auto& wl = j.at("workloads");
        c.workloads.functional_wordlines = wl.at("functional_wordlines").get<unsigned>();
        c.workloads.functional_page_bytes = wl.at("functional_page_bytes").get<unsigned>();
        const auto& seg = wl.at("segmentation");
        c.workloads.segmentation.width = seg.at("width").get<unsigned>();
        c.workloads.segmentation.height = seg.at("height").get<unsigned>();
        c.workloads.segmentation.classes = seg.at("classes").get<unsigned>();
        c.workloads.segmentation.channels = seg.at("channels").get<unsigned>();
        c.workloads.segmentation.scale_points = seg.at("scale_points").get<std::vector<double>>();
        c.workloads.segmentation.scale_min = seg.at("scale_range").at(0).get<double>();
        c.workloads.segmentation.scale_max = seg.at("scale_range").at(1).get<double>();
        c.workloads.segmentation.published = speedups_from_json(seg.at("published_speedup"));
        const auto& enc = wl.at("encryption");
        c.workloads.encryption.width = enc.at("width").get<unsigned>();
        c.workloads.encryption.height = enc.at("height").get<unsigned>();
        c.workloads.encryption.bits_per_pixel = enc.at("bits_per_pixel").get<unsigned>();
        c.workloads.encryption.scale_points = enc.at("scale_points").get<std::vector<double>>();
        c.workloads.encryption.scale_min = enc.at("scale_range").at(0).get<double>();
        c.workloads.encryption.scale_max = enc.at("scale_range").at(1).get<double>();
        c.workloads.encryption.published = speedups_from_json(enc.at("published_speedup"));
        const auto& bm = wl.at("bitmap");
        c.workloads.bitmap.users = bm.at("users").get<double>();
        c.workloads.bitmap.days_per_month = bm.at("days_per_month").get<unsigned>();
        c.workloads.bitmap.scale_points = bm.at("scale_points").get<std::vector<double>>();
        c.workloads.bitmap.scale_min = bm.at("scale_range").at(0).get<double>();
        c.workloads.bitmap.scale_max = bm.at("scale_range").at(1).get<double>();
        c.workloads.bitmap.functional_slices = bm.at("functional_slices").get<unsigned>();
        c.workloads.bitmap.functional_page_bytes = bm.at("functional_page_bytes").get<unsigned>();
        c.workloads.bitmap.published = speedups_from_json(bm.at("published_speedup"));

        c.validate();
        reject_unknown_keys(j, config_to_json(c), "");
        return c;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    }
}

json config_to_json(const SimConfig& c) {
    json j;
    const auto& w = c.physics.wear;
    j["cell_physics"] = {{"mean0_v", c.physics.mean0},
                         {"sigma0_v", c.physics.sigma0},
                         {"k_sigma", c.physics.k_sigma},
                         {"edge_k_sigma", c.physics.edge_k_sigma},
                         {"wear",
                          {{"sigma_coeff", w.sigma_coeff},
                           {"sigma_exponent", w.sigma_exponent},
                           {"pe_scale", w.pe_scale},
                           {"retention_shift_v", w.retention_shift},
                           {"retention_timescale_hours", w.retention_timescale_hours}}}};
    const auto& g = c.device.geometry;
    j["device"] = {{"blocks_per_plane", g.blocks_per_plane},
                   {"wordlines_per_block", g.wordlines_per_block},
                   {"page_size_bytes", g.page_size_bytes},
                   {"default_refs_v", c.device.default_refs},
                   {"dac_step_v", c.device.dac_step},
                   {"register_width_bits", c.device.register_width},
                   {"offset_policy", c.device.offset_policy == OffsetPolicy::Error ? "error" : "clamp-and-flag"}};
    json targets = json::array();
    for (const auto& t : c.calibration.targets)
        targets.push_back({{"op", t.op.name()},
                           {"target_percent", t.target_percent},
                           {"band_percent", {t.band_lo_percent, t.band_hi_percent}}});
    j["calibration"] = {{"pe_cycles", c.calibration.pe_cycles},
                        {"retention_hours", c.calibration.retention_hours},
                        {"heavy_pe_cycles", c.calibration.heavy_pe_cycles},
                        {"band_margin", c.calibration.band_margin},
                        {"sigma_exponent", c.calibration.sigma_exponent},
                        {"coeff_min", c.calibration.coeff_min},
                        {"coeff_max", c.calibration.coeff_max},
                        {"fresh_pages", c.calibration.fresh_bits / g.cells_per_wordline()},
                        {"fresh_max_expected_mismatches", c.calibration.fresh_max_expected_mismatches},
                        {"targets", targets}};
    const auto& s = c.ssd;
    j["ssd"] = {{"channels", s.channels},
                {"dies_per_channel", s.dies_per_channel},
                {"planes_per_die", s.planes_per_die},
                {"page_kib", s.page_kib},
                {"channel_bw_gib_s", s.channel_bw / 1073741824.0},
                {"host_bw_gib_s", s.host_bw / 1073741824.0},
                {"t_R_us", s.t_R_us},
                {"t_prog_us", s.t_prog_us},
                {"t_setfeature_us", s.t_setfeature_us},
                {"phase_model", {{"t_overhead_us", s.phases.t_overhead_us}, {"t_phase_us", s.phases.t_phase_us}}},
                {"t_phase_override_us", s.t_phase_override_us}};
    j["energy"] = {{"e_precharge_uj", c.energy.e_precharge_uj},
                   {"e_sense_per_phase_uj", c.energy.e_sense_per_phase_uj},
                   {"e_discharge_uj", c.energy.e_discharge_uj},
                   {"e_prog_uj", c.energy.e_prog_uj},
                   {"align_read_phases", c.energy.align_read_phases}};
    j["baselines"] = {{"parabit",
                       {{"op_us", optional_number(c.baselines.parabit.op_us)},
                        {"realloc_us", optional_number(c.baselines.parabit.realloc_us)}}},
                      {"flashcosmos",
                       {{"mws_us", optional_number(c.baselines.flashcosmos.mws_us)},
                        {"xor_us", optional_number(c.baselines.flashcosmos.xor_us)},
                        {"max_operands", c.baselines.flashcosmos.max_operands}}}};
    const auto& wp = c.workloads;
    j["workloads"] = {
        {"functional_wordlines", wp.functional_wordlines},
        {"functional_page_bytes", wp.functional_page_bytes},
        {"segmentation",
         {{"width", wp.segmentation.width},
          {"height", wp.segmentation.height},
          {"classes", wp.segmentation.classes},
          {"channels", wp.segmentation.channels},
          {"scale_points", wp.segmentation.scale_points},
          {"scale_range", {wp.segmentation.scale_min, wp.segmentation.scale_max}},
          {"published_speedup", speedups_to_json(wp.segmentation.published)}}},
        {"encryption",
         {{"width", wp.encryption.width},
          {"height", wp.encryption.height},
          {"bits_per_pixel", wp.encryption.bits_per_pixel},
          {"scale_points", wp.encryption.scale_points},
          {"scale_range", {wp.encryption.scale_min, wp.encryption.scale_max}},
          {"published_speedup", speedups_to_json(wp.encryption.published)}}},
        {"bitmap",
         {{"users", wp.bitmap.users},
          {"days_per_month", wp.bitmap.days_per_month},
          {"scale_points", wp.bitmap.scale_points},
          {"scale_range", {wp.bitmap.scale_min, wp.bitmap.scale_max}},
          {"functional_slices", wp.bitmap.functional_slices},
          {"functional_page_bytes", wp.bitmap.functional_page_bytes},
          {"published_speedup", speedups_to_json(wp.bitmap.published)}}}};
    return j;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw ConfigError("config parse error in " + path + ": " + ex.what());
    }
    return config_from_json(j);
}

void save_config(const SimConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << config_to_json(c).dump(2) << '\n';
}

const char* default_config_text() { return detail::kDefaultConfigJson; }

const char* tool_version() { return detail::kToolVersion; }

const SimConfig& default_config() {
    static const SimConfig cfg = config_from_json(json::parse(detail::kDefaultConfigJson));
    return cfg;
}

}  // namespace mcflash
