#include <doctest.h>

#include <random>
#include <string>

#include "spadrng/bitstream.hpp"

using namespace spadrng;

namespace {

// Bit-at-a-time references for the word-level helpers.
uint64_t extract_even_bits_ref(uint64_t w) {
    uint64_t r = 0;
    for (unsigned i = 0; i < 32; ++i)
        if ((w >> (2 * i)) & 1u) r |= uint64_t{1} << i;
    return r;
}

uint32_t compress_bits32_ref(uint32_t value, uint32_t mask) {
    uint32_t r = 0;
    unsigned out = 0;
    for (unsigned i = 0; i < 32; ++i) {
        if ((mask >> i) & 1u) {
            if ((value >> i) & 1u) r |= uint32_t{1} << out;
            ++out;
        }
    }
    return r;
}

} // namespace

TEST_CASE("extract_even_bits matches the per-bit reference") {
    std::mt19937_64 gen(123);
    CHECK(extract_even_bits(0) == 0);
    CHECK(extract_even_bits(~uint64_t{0}) == 0xFFFFFFFFu);
    CHECK(extract_even_bits(0x5555555555555555ull) == 0xFFFFFFFFu);
    CHECK(extract_even_bits(0xAAAAAAAAAAAAAAAAull) == 0);
    for (int i = 0; i < 20000; ++i) {
        uint64_t w = gen();
        CHECK(extract_even_bits(w) == extract_even_bits_ref(w));
    }
}

TEST_CASE("compress_bits32 matches the per-bit reference") {
    std::mt19937_64 gen(456);
    CHECK(compress_bits32(0xDEADBEEF, 0) == 0);
    CHECK(compress_bits32(0xDEADBEEF, 0xFFFFFFFF) == 0xDEADBEEF);
    for (int i = 0; i < 20000; ++i) {
        uint32_t v = static_cast<uint32_t>(gen());
        uint32_t m = static_cast<uint32_t>(gen());
        CHECK(compress_bits32(v, m) == compress_bits32_ref(v, m));
    }
    // Sparse and dense masks hit different table slices.
    for (unsigned i = 0; i < 32; ++i) {
        CHECK(compress_bits32(~0u, 1u << i) == 1u);
        CHECK(compress_bits32(1u << i, 1u << i) == 1u);
        CHECK(compress_bits32(~(1u << i), 1u << i) == 0u);
    }
}

TEST_CASE("BitVector push_back, get and string round trip") {
    BitVector v;
    std::string s;
    std::mt19937_64 gen(789);
    for (int i = 0; i < 1000; ++i) {
        bool b = gen() & 1;
        v.push_back(b);
        s += b ? '1' : '0';
    }
    REQUIRE(v.size() == 1000);
    CHECK(v.to_string() == s);
    CHECK(BitVector::from_string(s) == v);
    for (int i = 0; i < 1000; ++i) CHECK(v.get(i) == (s[i] == '1'));
}

TEST_CASE("BitVector append_bits matches push_back") {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 200; ++trial) {
        BitVector a, b;
        for (int chunk = 0; chunk < 20; ++chunk) {
            uint64_t bits = gen();
            unsigned count = gen() % 65;
            a.append_bits(bits, count);
            for (unsigned i = 0; i < count; ++i) b.push_back((bits >> i) & 1u);
        }
        CHECK(a == b);
    }
}

TEST_CASE("append_bits ignores chunk bits above count") {
    BitVector a, b;
    a.append_bits(~uint64_t{0}, 3);
    b.append_bits(0x7, 3);
    CHECK(a == b);
    CHECK(a.size() == 3);
    CHECK(a.count_ones() == 3);
}

TEST_CASE("BitVector append concatenates") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::string s1, s2;
        for (uint64_t i = 0, n = gen() % 200; i < n; ++i) s1 += (gen() & 1) ? '1' : '0';
        for (uint64_t i = 0, n = gen() % 200; i < n; ++i) s2 += (gen() & 1) ? '1' : '0';
        BitVector a = BitVector::from_string(s1);
        a.append(BitVector::from_string(s2));
        CHECK(a.to_string() == s1 + s2);
    }
}

TEST_CASE("bits past size stay zero through mixed operations") {
    std::mt19937_64 gen(99);
    BitVector v;
    for (int i = 0; i < 500; ++i) {
        switch (gen() % 3) {
            case 0: v.push_back(gen() & 1); break;
            case 1: v.append_bits(gen(), gen() % 65); break;
            default:
                if (v.size()) v.set(gen() % v.size());
                break;
        }
        if (v.size() % 64) {
            uint64_t last = v.words().back();
            CHECK((last >> (v.size() % 64)) == 0);
        }
    }
}

TEST_CASE("count_ones, one_positions and for_each_one agree") {
    std::mt19937_64 gen(1234);
    BitVector v = BitVector::zeros(5000);
    std::vector<uint64_t> expect;
    for (int i = 0; i < 300; ++i) {
        uint64_t pos = gen() % 5000;
        v.set(pos);
    }
    for (uint64_t i = 0; i < 5000; ++i)
        if (v.get(i)) expect.push_back(i);
    CHECK(v.count_ones() == expect.size());
    CHECK(v.one_positions() == expect);
    std::vector<uint64_t> seen;
    v.for_each_one([&](uint64_t p) { seen.push_back(p); });
    CHECK(seen == expect);
}

TEST_CASE("zeros produces an all-zero vector of the right size") {
    BitVector v = BitVector::zeros(129);
    CHECK(v.size() == 129);
    CHECK(v.count_ones() == 0);
    CHECK(v.words().size() == 3);
}
