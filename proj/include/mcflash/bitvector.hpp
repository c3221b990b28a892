#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mcflash {

// Packed page-sized bit array. Bit i lives in bit (i % 8) of byte (i / 8)
// when serialized.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t nbits, bool value = false);

    static BitVector random(std::size_t nbits, std::mt19937_64& rng);
    static BitVector from_bytes(const std::vector<std::uint8_t>& bytes);
    static BitVector from_string(const std::string& bits);  // "1010..." left to right = bit 0..n-1

    std::size_t size() const noexcept { return nbits_; }
    bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
    void set(std::size_t i, bool v) noexcept {
        const std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= m;
        else
            words_[i >> 6] &= ~m;
    }

    std::size_t count() const noexcept;
    bool all() const noexcept { return count() == nbits_; }
    bool none() const noexcept { return count() == 0; }

    BitVector& operator&=(const BitVector& o);
    BitVector& operator|=(const BitVector& o);
    BitVector& operator^=(const BitVector& o);
    BitVector operator~() const;

    friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
    friend BitVector operator|(BitVector a, const BitVector& b) { return a |= b; }
    friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
    friend bool operator==(const BitVector&, const BitVector&) = default;

    std::vector<std::uint8_t> to_bytes() const;
    std::string to_hex() const;

    const std::vector<std::uint64_t>& words() const noexcept { return words_; }
    std::vector<std::uint64_t>& words() noexcept { return words_; }
    void clear_tail() noexcept;

private:
    void check_same_size(const BitVector& o) const;

    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

// Number of positions where a and b differ.
std::size_t hamming(const BitVector& a, const BitVector& b);

}  // namespace mcflash
