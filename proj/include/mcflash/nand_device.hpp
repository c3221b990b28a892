#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcflash/bitvector.hpp"
#include "mcflash/cell_physics.hpp"

namespace mcflash {

struct DeviceGeometry {
    std::uint32_t blocks_per_plane = 16;
    std::uint32_t wordlines_per_block = 64;
    std::uint32_t page_size_bytes = 16384;

    std::size_t cells_per_wordline() const noexcept { return std::size_t{page_size_bytes} * 8; }
    std::size_t wordline_count() const noexcept {
        return std::size_t{blocks_per_plane} * wordlines_per_block;
    }
    void validate() const;
};

enum class PageKind : std::uint8_t { Lsb, Msb };

std::string to_string(PageKind k);

enum class OffsetPolicy : std::uint8_t { Error, ClampAndFlag };

// Three independent signed offset registers, one per reference.
struct ReadRefConfig {
    std::array<int, 3> offset{0, 0, 0};
    double dac_step = 0.025;
    int register_width = 8;

    int min_offset() const noexcept { return -(1 << (register_width - 1)); }
    int max_offset() const noexcept { return (1 << (register_width - 1)) - 1; }
    bool in_range() const noexcept;
    double shift(std::size_t vref) const noexcept { return offset[vref] * dac_step; }

    friend bool operator==(const ReadRefConfig&, const ReadRefConfig&) = default;
};

struct DeviceParams {
    DeviceGeometry geometry;
    std::array<double, 3> default_refs{};
    double dac_step = 0.025;
    int register_width = 8;
    OffsetPolicy offset_policy = OffsetPolicy::ClampAndFlag;

    ReadRefConfig default_config() const { return ReadRefConfig{{0, 0, 0}, dac_step, register_width}; }
    void validate() const;
};

struct WordlineAddr {
    std::uint32_t block = 0;
    std::uint32_t wordline = 0;

    friend bool operator==(const WordlineAddr&, const WordlineAddr&) = default;
};

struct PageAddr {
    WordlineAddr wl;
    PageKind kind = PageKind::Lsb;
};

struct WordlineImage {
    std::vector<Level> states;
    std::vector<float> vth;
    bool programmed = false;
    double age_hours = 0.0;  // retention experienced since program
};

struct BlockMeta {
    WearState wear;
    std::uint64_t erase_count = 0;
};

struct DeviceCounters {
    std::uint64_t page_reads = 0;      // sensing operations (LSB, MSB; SBR counts two)
    std::uint64_t sensing_phases = 0;
    std::uint64_t page_transfers = 0;  // pages returned to the controller
    std::uint64_t programs = 0;
    std::uint64_t erases = 0;
    std::uint64_t copybacks = 0;
    std::uint64_t feature_switches = 0;
};

inline constexpr int kLsbPhases = 1;
inline constexpr int kMsbPhases = 2;
inline constexpr int kSbrPhases = 4;

// Single-owner behavioral MLC NAND plane. Cell samples are drawn from
// per-wordline streams derived from the device seed, so results do not
// depend on the order in which wordlines are touched.
class NandDevice {
public:
    NandDevice(DeviceParams params, PhysicsParams physics, std::uint64_t seed);

    const DeviceParams& params() const noexcept { return params_; }
    const PhysicsParams& physics() const noexcept { return physics_; }
    const DeviceGeometry& geometry() const noexcept { return params_.geometry; }
    std::size_t page_bits() const noexcept { return params_.geometry.cells_per_wordline(); }

    void erase_block(std::uint32_t block);
    void program_wordline(WordlineAddr wl, const BitVector& lsb, const BitVector& msb);

    BitVector read_page(WordlineAddr wl, PageKind kind, const ReadRefConfig& cfg);
    BitVector soft_bit_read(WordlineAddr wl, const ReadRefConfig& cfg_plus, const ReadRefConfig& cfg_minus);
    BitVector inverse_read(WordlineAddr wl, PageKind kind, const ReadRefConfig& cfg);

    // Internal move: src is sensed at default references into the die buffer
    // and staged as one half of dst's pair. The wordline is programmed once
    // both halves are staged or complete_staged() supplies a constant partner.
    void copyback(PageAddr src, PageAddr dst);
    void complete_staged(WordlineAddr dst, bool fill_bit);
    // Stages data already held in the die's page buffer (a previous compute
    // result) as one half of dst's pair, under the same completion rule.
    void stage_buffer(PageAddr dst, const BitVector& data);
    bool has_staged(WordlineAddr wl) const;

    // Returns true when offsets were clamped to the register range.
    bool set_feature(const ReadRefConfig& cfg);
    const ReadRefConfig& get_feature() const noexcept { return feature_; }
    bool feature_clamped() const noexcept { return feature_clamped_; }

    // Accounting for n erase+program rounds. Wear depends only on the cycle
    // count, so intermediate page contents are not materialized.
    void stress_cycles(std::uint32_t block, std::uint64_t n);

    // Shifts stored samples of programmed wordlines by the retention model.
    void bake(std::uint32_t block, double hours);

    const BlockMeta& block_meta(std::uint32_t block) const;
    const WordlineImage& image(WordlineAddr wl);
    bool is_programmed(WordlineAddr wl) const;
    bool is_writable(WordlineAddr wl) const;

    const DeviceCounters& counters() const noexcept { return counters_; }
    void reset_counters() noexcept { counters_ = {}; }

    std::vector<std::uint8_t> dump_page_raw(WordlineAddr wl, PageKind kind);
    std::string dump_page_hex(WordlineAddr wl, PageKind kind);

private:
    struct Staged {
        std::optional<BitVector> lsb;
        std::optional<BitVector> msb;
    };

    void check_block(std::uint32_t block) const;
    void check_addr(WordlineAddr wl) const;
    void check_cfg(const ReadRefConfig& cfg) const;
    void stage(PageAddr dst, BitVector data);
    std::size_t slot(WordlineAddr wl) const noexcept {
        return std::size_t{wl.block} * params_.geometry.wordlines_per_block + wl.wordline;
    }
    std::mt19937_64 wordline_stream(WordlineAddr wl, std::uint64_t tag) const;
    WordlineImage& materialize(WordlineAddr wl);
    BitVector sense(const WordlineImage& img, PageKind kind, const ReadRefConfig& cfg) const;

    DeviceParams params_;
    PhysicsParams physics_;
    std::uint64_t seed_;
    std::vector<BlockMeta> blocks_;
    std::vector<WordlineImage> wordlines_;
    std::unordered_map<std::size_t, Staged> staged_;
    ReadRefConfig feature_;
    bool feature_clamped_ = false;
    DeviceCounters counters_;
};

}  // namespace mcflash
