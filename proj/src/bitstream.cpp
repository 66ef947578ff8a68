#include "spadrng/bitstream.hpp"

#include <array>
#include <bit>
#include <stdexcept>

namespace spadrng {

BitVector BitVector::zeros(uint64_t n_bits) {
    BitVector v;
    v.n_ = n_bits;
    v.words_.assign((n_bits + 63) / 64, 0);
    return v;
}

BitVector BitVector::from_string(const std::string& s) {
    BitVector v;
    for (char c : s) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("BitVector::from_string: not a 0/1 string");
        v.push_back(c == '1');
    }
    return v;
}

void BitVector::push_back(bool bit) {
    if ((n_ & 63) == 0) words_.push_back(0);
    if (bit) words_.back() |= uint64_t{1} << (n_ & 63);
    ++n_;
}

void BitVector::append_bits(uint64_t chunk, unsigned count) {
    if (count == 0) return;
    if (count < 64) chunk &= (uint64_t{1} << count) - 1;
    unsigned off = n_ & 63;
    if (off == 0) {
        words_.push_back(chunk);
    } else {
        words_.back() |= chunk << off;
        if (off + count > 64) words_.push_back(chunk >> (64 - off));
    }
    n_ += count;
}

void BitVector::append(const BitVector& other) {
    uint64_t remaining = other.n_;
    for (size_t wi = 0; remaining > 0; ++wi) {
        unsigned take = remaining >= 64 ? 64u : static_cast<unsigned>(remaining);
        append_bits(other.words_[wi], take);
        remaining -= take;
    }
}

uint64_t BitVector::count_ones() const {
    uint64_t c = 0;
    for (uint64_t w : words_) c += static_cast<uint64_t>(std::popcount(w));
    return c;
}

std::vector<uint64_t> BitVector::one_positions() const {
    std::vector<uint64_t> out;
    out.reserve(count_ones());
    for_each_one([&](uint64_t pos) { out.push_back(pos); });
    return out;
}

std::string BitVector::to_string() const {
    std::string s(n_, '0');
    for_each_one([&](uint64_t pos) { s[pos] = '1'; });
    return s;
}

void BitVector::clear() {
    words_.clear();
    n_ = 0;
}

void BitVector::release() {
    std::vector<uint64_t>().swap(words_);
    n_ = 0;
}

uint64_t extract_even_bits(uint64_t w) {
    w &= 0x5555555555555555ull;
    w = (w | (w >> 1)) & 0x3333333333333333ull;
    w = (w | (w >> 2)) & 0x0F0F0F0F0F0F0F0Full;
    w = (w | (w >> 4)) & 0x00FF00FF00FF00FFull;
    w = (w | (w >> 8)) & 0x0000FFFF0000FFFFull;
    w = (w | (w >> 16)) & 0x00000000FFFFFFFFull;
    return w;
}

namespace {

// pext_table[m][v] = bits of v selected by mask m, compressed toward bit 0.
struct PextTable {
    std::array<std::array<uint8_t, 256>, 256> out;
    PextTable() {
        for (unsigned m = 0; m < 256; ++m) {
            for (unsigned v = 0; v < 256; ++v) {
                unsigned res = 0, k = 0;
                for (unsigned b = 0; b < 8; ++b) {
                    if (m & (1u << b)) {
                        if (v & (1u << b)) res |= 1u << k;
                        ++k;
                    }
                }
                out[m][v] = static_cast<uint8_t>(res);
            }
        }
    }
};

const PextTable& pext_table() {
    static const PextTable t;
    return t;
}

} // namespace

uint32_t compress_bits32(uint32_t value, uint32_t mask) {
    const PextTable& t = pext_table();
    uint32_t res = 0;
    unsigned shift = 0;
    for (unsigned byte = 0; byte < 4; ++byte) {
        unsigned m = (mask >> (8 * byte)) & 0xFF;
        unsigned v = (value >> (8 * byte)) & 0xFF;
        res |= static_cast<uint32_t>(t.out[m][v]) << shift;
        shift += static_cast<unsigned>(std::popcount(m));
    }
    return res;
}

} // namespace spadrng
