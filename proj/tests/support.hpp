#pragma once

#include <cstdint>
#include <random>

#include "mcflash/config.hpp"
#include "mcflash/nand_device.hpp"

namespace mcflash::test {

// Small device built from the shipped parameters.
inline DeviceParams small_device(std::uint32_t blocks = 2, std::uint32_t wordlines = 8,
                                 std::uint32_t page_bytes = 1024) {
    DeviceParams d = default_config().device;
    d.geometry.blocks_per_plane = blocks;
    d.geometry.wordlines_per_block = wordlines;
    d.geometry.page_size_bytes = page_bytes;
    return d;
}

inline NandDevice make_device(std::uint64_t seed = 7, std::uint32_t blocks = 2, std::uint32_t wordlines = 8,
                              std::uint32_t page_bytes = 1024) {
    return NandDevice(small_device(blocks, wordlines, page_bytes), default_config().physics, seed);
}

}  // namespace mcflash::test
