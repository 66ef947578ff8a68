#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spadrng {

// Packed bit sequence. Bit i lives in words()[i / 64] at position i % 64
// (LSB first), which is the same layout as the packed little-endian byte
// format used on disk, so serialization is a straight copy.
//
// Invariant: bits past size() in the last word are always zero.
class BitVector {
public:
    BitVector() = default;

    static BitVector zeros(uint64_t n_bits);
    static BitVector from_string(const std::string& s); // '0'/'1' chars, for tests

    uint64_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool get(uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(uint64_t i) { words_[i >> 6] |= uint64_t{1} << (i & 63); }

    void push_back(bool bit);

    // Appends the low `count` bits of `chunk` (count <= 64). Bits of chunk
    // above `count` are ignored.
    void append_bits(uint64_t chunk, unsigned count);
    void append(const BitVector& other);

    uint64_t count_ones() const;

    // Calls f(position) for every set bit, in increasing order.
    template <class F>
    void for_each_one(F&& f) const {
        for (size_t wi = 0; wi < words_.size(); ++wi) {
            uint64_t w = words_[wi];
            while (w) {
                f(uint64_t{wi} * 64 + static_cast<unsigned>(__builtin_ctzll(w)));
                w &= w - 1;
            }
        }
    }
    std::vector<uint64_t> one_positions() const;

    const std::vector<uint64_t>& words() const { return words_; }

    std::string to_string() const;

    bool operator==(const BitVector& o) const {
        return n_ == o.n_ && words_ == o.words_;
    }

    void clear();
    void reserve_bits(uint64_t n_bits) { words_.reserve((n_bits + 63) / 64); }

    // Releases the storage entirely (size becomes 0).
    void release();

private:
    std::vector<uint64_t> words_;
    uint64_t n_ = 0;
};

// Gathers the 32 even-position bits of w (0, 2, ..., 62) into the low half
// of the result. Bit-parallel unzip, no lookup tables.
uint64_t extract_even_bits(uint64_t w);

// Compresses the bits of `value` selected by `mask` toward the LSB,
// preserving order (software PEXT). Table-driven, byte at a time.
uint32_t compress_bits32(uint32_t value, uint32_t mask);

} // namespace spadrng
