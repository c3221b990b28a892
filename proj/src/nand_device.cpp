#include "mcflash/nand_device.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mcflash/errors.hpp"

namespace mcflash {

namespace {

constexpr std::uint64_t kTagProgram = 0x50524f47;
constexpr std::uint64_t kTagErase = 0x45524153;

}  // namespace

std::string to_string(PageKind k) { return k == PageKind::Lsb ? "LSB" : "MSB"; }

void DeviceGeometry::validate() const {
    if (blocks_per_plane < 1 || wordlines_per_block < 1 || page_size_bytes < 1)
        throw ConfigError("geometry: counts must be >= 1");
    if (!std::has_single_bit(page_size_bytes)) throw ConfigError("geometry: page size must be a power of two");
}

bool ReadRefConfig::in_range() const noexcept {
    return std::all_of(offset.begin(), offset.end(), [&](int o) { return o >= min_offset() && o <= max_offset(); });
}

void DeviceParams::validate() const {
    geometry.validate();
    if (!(dac_step > 0.0)) throw ConfigError("device: dac_step must be positive");
    if (register_width < 2 || register_width > 30) throw ConfigError("device: register_width must be in [2, 30]");
    if (!(default_refs[0] < default_refs[1] && default_refs[1] < default_refs[2]))
        throw ConfigError("device: default references must be increasing");
}

NandDevice::NandDevice(DeviceParams params, PhysicsParams physics, std::uint64_t seed)
    : params_(std::move(params)), physics_(std::move(physics)), seed_(seed) {
    params_.validate();
    physics_.validate();
    blocks_.resize(params_.geometry.blocks_per_plane);
    wordlines_.resize(params_.geometry.wordline_count());
    feature_ = params_.default_config();
}

void NandDevice::check_block(std::uint32_t block) const {
    if (block >= params_.geometry.blocks_per_plane) throw RangeError("block address out of range");
}

void NandDevice::check_addr(WordlineAddr wl) const {
    check_block(wl.block);
    if (wl.wordline >= params_.geometry.wordlines_per_block) throw RangeError("wordline address out of range");
}

void NandDevice::check_cfg(const ReadRefConfig& cfg) const {
    if (!cfg.in_range()) throw RangeError("read offset outside the register range");
}

std::mt19937_64 NandDevice::wordline_stream(WordlineAddr wl, std::uint64_t tag) const {
    const auto& meta = blocks_[wl.block];
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      wl.block, wl.wordline,
                      static_cast<std::uint32_t>(meta.erase_count), static_cast<std::uint32_t>(meta.erase_count >> 32),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

void NandDevice::erase_block(std::uint32_t block) {
    check_block(block);
    auto& meta = blocks_[block];
    meta.erase_count += 1;
    meta.wear.pe_cycles += 1;
    meta.wear.retention_hours = 0.0;
    const auto wpb = params_.geometry.wordlines_per_block;
    for (std::uint32_t w = 0; w < wpb; ++w) {
        wordlines_[slot({block, w})] = WordlineImage{};
        staged_.erase(slot({block, w}));
    }
    counters_.erases += 1;
}

void NandDevice::stress_cycles(std::uint32_t block, std::uint64_t n) {
    check_block(block);
    if (n == 0) return;
    auto& meta = blocks_[block];
    meta.erase_count += n;
    meta.wear.pe_cycles += n;
    meta.wear.retention_hours = 0.0;
    const auto wpb = params_.geometry.wordlines_per_block;
    for (std::uint32_t w = 0; w < wpb; ++w) {
        wordlines_[slot({block, w})] = WordlineImage{};
        staged_.erase(slot({block, w}));
    }
    counters_.erases += n;
    counters_.programs += n * wpb;
}

void NandDevice::program_wordline(WordlineAddr wl, const BitVector& lsb, const BitVector& msb) {
    check_addr(wl);
    const std::size_t n = page_bits();
    if (lsb.size() != n || msb.size() != n) throw std::invalid_argument("page length does not match wordline size");
    auto& img = wordlines_[slot(wl)];
    if (img.programmed) throw StateError("wordline already programmed since last erase");
    if (staged_.count(slot(wl)) != 0) throw StateError("wordline has a pending staged copyback");

    const WearState at_program{blocks_[wl.block].wear.pe_cycles, 0.0};
    const auto dists = distributions(at_program, physics_);
    auto rng = wordline_stream(wl, kTagProgram);
    std::normal_distribution<double> z(0.0, 1.0);

    img.states.resize(n);
    img.vth.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Level l = level_from_bits(lsb.get(i), msb.get(i));
        const auto& d = dists[index(l)];
        img.states[i] = l;
        img.vth[i] = static_cast<float>(d.mean + d.sigma * z(rng));
    }
    img.programmed = true;
    img.age_hours = 0.0;
    counters_.programs += 1;
}

WordlineImage& NandDevice::materialize(WordlineAddr wl) {
    auto& img = wordlines_[slot(wl)];
    if (img.programmed || !img.vth.empty()) return img;
    // Erased wordline: draw erase-state samples on first observation.
    const std::size_t n = page_bits();
    const auto d = distribution_params(Level::L0, WearState{blocks_[wl.block].wear.pe_cycles, 0.0}, physics_);
    auto rng = wordline_stream(wl, kTagErase);
    std::normal_distribution<double> z(0.0, 1.0);
    img.states.assign(n, Level::L0);
    img.vth.resize(n);
    for (std::size_t i = 0; i < n; ++i) img.vth[i] = static_cast<float>(d.mean + d.sigma * z(rng));
    return img;
}

BitVector NandDevice::sense(const WordlineImage& img, PageKind kind, const ReadRefConfig& cfg) const {
    const std::size_t n = img.vth.size();
    BitVector out(n);
    auto& words = out.words();
    const float* v = img.vth.data();
    if (kind == PageKind::Lsb) {
        const double r1 = params_.default_refs[1] + cfg.shift(1);
        for (std::size_t w = 0; w < words.size(); ++w) {
            std::uint64_t bits = 0;
            const std::size_t base = w * 64, end = std::min(n, base + 64);
            for (std::size_t i = base; i < end; ++i)
                bits |= static_cast<std::uint64_t>(static_cast<double>(v[i]) < r1) << (i - base);
            words[w] = bits;
        }
    } else {
        const double r0 = params_.default_refs[0] + cfg.shift(0);
        const double r2 = params_.default_refs[2] + cfg.shift(2);
        for (std::size_t w = 0; w < words.size(); ++w) {
            std::uint64_t bits = 0;
            const std::size_t base = w * 64, end = std::min(n, base + 64);
            for (std::size_t i = base; i < end; ++i) {
                const double x = v[i];
                bits |= static_cast<std::uint64_t>(x < r0 || x >= r2) << (i - base);
            }
            words[w] = bits;
        }
    }
    return out;
}

BitVector NandDevice::read_page(WordlineAddr wl, PageKind kind, const ReadRefConfig& cfg) {
    check_addr(wl);
    check_cfg(cfg);
    const auto& img = materialize(wl);
    counters_.page_reads += 1;
    counters_.sensing_phases += kind == PageKind::Lsb ? kLsbPhases : kMsbPhases;
    counters_.page_transfers += 1;
    return sense(img, kind, cfg);
}

BitVector NandDevice::soft_bit_read(WordlineAddr wl, const ReadRefConfig& cfg_plus, const ReadRefConfig& cfg_minus) {
    check_addr(wl);
    check_cfg(cfg_plus);
    check_cfg(cfg_minus);
    const auto& img = materialize(wl);
    BitVector out = sense(img, PageKind::Msb, cfg_minus);
    out ^= sense(img, PageKind::Msb, cfg_plus);
    counters_.page_reads += 2;
    counters_.sensing_phases += kSbrPhases;
    counters_.page_transfers += 1;
    return ~out;
}

BitVector NandDevice::inverse_read(WordlineAddr wl, PageKind kind, const ReadRefConfig& cfg) {
    return ~read_page(wl, kind, cfg);
}

void NandDevice::stage(PageAddr dst, BitVector data) {
    auto& st = staged_[slot(dst.wl)];
    auto& half = dst.kind == PageKind::Lsb ? st.lsb : st.msb;
    if (half) throw StateError("destination page already staged");
    half = std::move(data);
    if (st.lsb && st.msb) {
        Staged done = std::move(st);
        staged_.erase(slot(dst.wl));
        program_wordline(dst.wl, *done.lsb, *done.msb);
    }
}

void NandDevice::copyback(PageAddr src, PageAddr dst) {
    check_addr(src.wl);
    check_addr(dst.wl);
    if (!is_writable(dst.wl)) throw StateError("copyback destination wordline is not writable");
    const auto& img = materialize(src.wl);
    BitVector data = sense(img, src.kind, params_.default_config());
    stage(dst, std::move(data));
    counters_.page_reads += 1;
    counters_.sensing_phases += src.kind == PageKind::Lsb ? kLsbPhases : kMsbPhases;
    counters_.copybacks += 1;
}

void NandDevice::stage_buffer(PageAddr dst, const BitVector& data) {
    check_addr(dst.wl);
    if (!is_writable(dst.wl)) throw StateError("staging destination wordline is not writable");
    if (data.size() != page_bits()) throw std::invalid_argument("page length does not match wordline size");
    stage(dst, data);
}

void NandDevice::complete_staged(WordlineAddr dst, bool fill_bit) {
    check_addr(dst);
    auto it = staged_.find(slot(dst));
    if (it == staged_.end()) throw StateError("no staged copyback for wordline");
    Staged done = std::move(it->second);
    staged_.erase(it);
    const BitVector fill(page_bits(), fill_bit);
    program_wordline(dst, done.lsb ? *done.lsb : fill, done.msb ? *done.msb : fill);
}

bool NandDevice::has_staged(WordlineAddr wl) const { return staged_.count(slot(wl)) != 0; }

bool NandDevice::set_feature(const ReadRefConfig& cfg) {
    ReadRefConfig next = cfg;
    next.dac_step = params_.dac_step;
    next.register_width = params_.register_width;
    bool clamped = false;
    if (!next.in_range()) {
        if (params_.offset_policy == OffsetPolicy::Error)
            throw RangeError("offset exceeds the signed register width");
        for (auto& o : next.offset) {
            const int c = std::clamp(o, next.min_offset(), next.max_offset());
            clamped = clamped || c != o;
            o = c;
        }
    }
    if (!(next == feature_)) counters_.feature_switches += 1;
    feature_ = next;
    feature_clamped_ = clamped;
    return clamped;
}

void NandDevice::bake(std::uint32_t block, double hours) {
    check_block(block);
    if (hours < 0.0) throw std::invalid_argument("bake hours must be non-negative");
    if (hours == 0.0) return;
    auto& meta = blocks_[block];
    meta.wear.retention_hours += hours;
    const auto& wear = physics_.wear;
    for (std::uint32_t w = 0; w < params_.geometry.wordlines_per_block; ++w) {
        auto& img = wordlines_[slot({block, w})];
        if (!img.programmed) continue;
        std::array<float, 4> delta{};
        for (std::size_t s = 0; s < kNumLevels; ++s) {
            const auto l = static_cast<Level>(s);
            delta[s] = static_cast<float>(retention_mean_shift(l, img.age_hours + hours, wear) -
                                          retention_mean_shift(l, img.age_hours, wear));
        }
        for (std::size_t i = 0; i < img.vth.size(); ++i) img.vth[i] += delta[index(img.states[i])];
        img.age_hours += hours;
    }
}

const BlockMeta& NandDevice::block_meta(std::uint32_t block) const {
    check_block(block);
    return blocks_[block];
}

const WordlineImage& NandDevice::image(WordlineAddr wl) {
    check_addr(wl);
    return materialize(wl);
}

bool NandDevice::is_programmed(WordlineAddr wl) const {
    check_addr(wl);
    return wordlines_[slot(wl)].programmed;
}

bool NandDevice::is_writable(WordlineAddr wl) const {
    check_addr(wl);
    return !wordlines_[slot(wl)].programmed;
}

std::vector<std::uint8_t> NandDevice::dump_page_raw(WordlineAddr wl, PageKind kind) {
    return read_page(wl, kind, params_.default_config()).to_bytes();
}

std::string NandDevice::dump_page_hex(WordlineAddr wl, PageKind kind) {
    return read_page(wl, kind, params_.default_config()).to_hex();
}

}  // namespace mcflash
