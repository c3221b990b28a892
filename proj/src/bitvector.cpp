#include "mcflash/bitvector.hpp"

#include <bit>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace mcflash {

BitVector::BitVector(std::size_t nbits, bool value)
    : nbits_(nbits), words_((nbits + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    clear_tail();
}

BitVector BitVector::random(std::size_t nbits, std::mt19937_64& rng) {
    BitVector v(nbits);
    for (auto& w : v.words_) w = rng();
    v.clear_tail();
    return v;
}

BitVector BitVector::from_bytes(const std::vector<std::uint8_t>& bytes) {
    BitVector v(bytes.size() * 8);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        v.words_[i / 8] |= static_cast<std::uint64_t>(bytes[i]) << (8 * (i % 8));
    return v;
}

BitVector BitVector::from_string(const std::string& bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != '0' && bits[i] != '1') throw std::invalid_argument("bit string must contain only 0/1");
        v.set(i, bits[i] == '1');
    }
    return v;
}

void BitVector::clear_tail() noexcept {
    if (nbits_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (nbits_ % 64)) - 1;
}

std::size_t BitVector::count() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

void BitVector::check_same_size(const BitVector& o) const {
    if (o.nbits_ != nbits_) throw std::invalid_argument("bit vector length mismatch");
}

BitVector& BitVector::operator&=(const BitVector& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
}

BitVector& BitVector::operator|=(const BitVector& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
}

BitVector& BitVector::operator^=(const BitVector& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
    return *this;
}

BitVector BitVector::operator~() const {
    BitVector r(*this);
    for (auto& w : r.words_) w = ~w;
    r.clear_tail();
    return r;
}

std::vector<std::uint8_t> BitVector::to_bytes() const {
    std::vector<std::uint8_t> out((nbits_ + 7) / 8);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
    return out;
}

std::string BitVector::to_hex() const {
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    const auto bytes = to_bytes();
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (i != 0) os << (i % 32 == 0 ? '\n' : ' ');
        os << std::setw(2) << static_cast<unsigned>(bytes[i]);
    }
    return os.str();
}

std::size_t hamming(const BitVector& a, const BitVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("bit vector length mismatch");
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.words().size(); ++i)
        n += static_cast<std::size_t>(std::popcount(a.words()[i] ^ b.words()[i]));
    return n;
}

}  // namespace mcflash
