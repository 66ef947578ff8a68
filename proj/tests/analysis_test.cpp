#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spadrng/analysis.hpp"

using namespace spadrng;

TEST_CASE("binary entropy basics") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.11) == doctest::Approx(0.499916).epsilon(1e-4));
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double p = d(gen);
        CHECK(binary_entropy(p) == doctest::Approx(binary_entropy(1 - p)));
        CHECK(binary_entropy(p) <= 1.0);
        CHECK(binary_entropy(p) >= 0.0);
    }
    CHECK_THROWS(binary_entropy(-0.01));
    CHECK_THROWS(binary_entropy(1.01));
}

TEST_CASE("empirical entropy") {
    CHECK(empirical_entropy({25, 25, 25, 25}) == doctest::Approx(2.0));
    CHECK(empirical_entropy({1, 1, 2}) == doctest::Approx(1.5));
    CHECK(empirical_entropy({7}) == 0.0);
    CHECK(empirical_entropy({0, 0, 9}) == 0.0);
    CHECK_THROWS(empirical_entropy(std::vector<uint64_t>{}));
    SymbolStream ss;
    ss.alphabet = 4;
    ss.symbols = {0, 1, 2, 3, 0, 1, 2, 3};
    CHECK(empirical_entropy(ss) == doctest::Approx(2.0));
}

TEST_CASE("sampling frequency for peak per-sample entropy") {
    CHECK(peak_entropy_frequency(200e3) == doctest::Approx(288539.008).epsilon(1e-8));
    // Per-sample entropy H(p1) peaks where p1 crosses 1/2, at f = r/ln2; the
    // rate in bits per second keeps growing with f regardless.
    const double r = 200e3;
    const double fstar = peak_entropy_frequency(r);
    std::vector<double> fs = {fstar * 0.9, fstar, fstar * 1.1};
    std::vector<RatePoint> c = rate_curve(r, fs);
    CHECK(c[1].p1 == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(c[1].entropy_bits > c[0].entropy_bits);
    CHECK(c[1].entropy_bits > c[2].entropy_bits);
    CHECK(c[0].rate_bits_s < c[1].rate_bits_s);
    CHECK(c[1].rate_bits_s < c[2].rate_bits_s);
}

TEST_CASE("rate curve values") {
    std::vector<RatePoint> c = rate_curve(200e3, {200e3, 100e6}, 0.25);
    CHECK(c[0].p1 == doctest::Approx(1.0 - std::exp(-1.0)));
    CHECK(c[0].entropy_bits == doctest::Approx(binary_entropy(c[0].p1)));
    CHECK(c[0].rate_bits_s == doctest::Approx(200e3 * c[0].entropy_bits));
    CHECK(c[0].effective_rate_bits_s == doctest::Approx(0.75 * c[0].rate_bits_s));
    CHECK(c[1].p1 == doctest::Approx(0.002).epsilon(1e-3));
    CHECK_THROWS(rate_curve(-1.0, {1e6}));
    CHECK_THROWS(rate_curve(200e3, {0.0}));
    CHECK_THROWS(rate_curve(200e3, {1e6}, 1.5));
}

namespace {

// Direct O(n * k) autocorrelation for the oracle.
double corr_ref(const std::vector<int>& x, unsigned k) {
    const size_t m = x.size() - k;
    double sh = 0, st = 0, c = 0;
    for (size_t i = 0; i < m; ++i) {
        sh += x[i];
        st += x[i + k];
        c += x[i] * x[i + k];
    }
    const double num = m * c - sh * st;
    const double den = std::sqrt(sh * (m - sh)) * std::sqrt(st * (m - st));
    return den > 0 ? num / den : 0.0;
}

} // namespace

TEST_CASE("serial correlation matches the direct reference") {
    std::mt19937_64 gen(2);
    for (double p : {0.5, 0.05}) {
        BitVector bits;
        std::vector<int> x;
        std::bernoulli_distribution d(p);
        for (int i = 0; i < 3000; ++i) {
            bool b = d(gen);
            bits.push_back(b);
            x.push_back(b);
        }
        CorrelationReport rep = serial_correlation(bits, 90);
        REQUIRE(rep.r.size() == 90);
        for (unsigned k = 1; k <= 90; ++k)
            REQUIRE(rep.r[k - 1] == doctest::Approx(corr_ref(x, k)).epsilon(1e-9));
    }
}

TEST_CASE("lags past one word boundary are handled") {
    std::mt19937_64 gen(3);
    BitVector bits;
    std::vector<int> x;
    for (int i = 0; i < 500; ++i) {
        bool b = gen() & 1;
        bits.push_back(b);
        x.push_back(b);
    }
    CorrelationReport rep = serial_correlation(bits, 200);
    for (unsigned k : {63u, 64u, 65u, 127u, 128u, 129u, 200u})
        CHECK(rep.r[k - 1] == doctest::Approx(corr_ref(x, k)).epsilon(1e-9));
}

TEST_CASE("alternating bits have lag-1 correlation -1") {
    BitVector bits;
    for (int i = 0; i < 1000; ++i) bits.push_back(i & 1);
    CorrelationReport rep = serial_correlation(bits, 4);
    CHECK(rep.r[0] == doctest::Approx(-1.0));
    CHECK(rep.r[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.all_in_band == false);
    CHECK(rep.worst_lag == 1);
}

TEST_CASE("constant input degenerates to zero correlation") {
    BitVector bits = BitVector::zeros(1000);
    CorrelationReport rep = serial_correlation(bits, 10);
    for (double r : rep.r) CHECK(r == 0.0);
}

TEST_CASE("fair independent bits pass the full report") {
    std::mt19937_64 gen(2026);
    BitVector bits;
    for (int i = 0; i < (1 << 20); ++i) bits.push_back(gen() & 1);
    BitReport rep = analyze_bits(bits, 100);
    CHECK(rep.n_bits == (1 << 20));
    CHECK(rep.bias_in_band);
    CHECK(rep.corr.all_in_band);
    CHECK(rep.passed);
    CHECK(rep.entropy > 0.9999);
}

TEST_CASE("a sticky Markov stream fails the lag test") {
    std::mt19937_64 gen(5);
    std::bernoulli_distribution flip(0.3);
    BitVector bits;
    bool cur = false;
    for (int i = 0; i < 100000; ++i) {
        if (flip(gen)) cur = !cur;
        bits.push_back(cur);
    }
    BitReport rep = analyze_bits(bits, 100);
    CHECK(rep.corr.r[0] > 0.3); // theory: 1 - 2 * 0.3 = 0.4
    CHECK_FALSE(rep.corr.all_in_band);
    CHECK_FALSE(rep.passed);
}

TEST_CASE("a biased stream fails the bias test") {
    std::mt19937_64 gen(6);
    std::bernoulli_distribution d(0.51);
    BitVector bits;
    for (int i = 0; i < 100000; ++i) bits.push_back(d(gen));
    BitReport rep = analyze_bits(bits, 20);
    CHECK_FALSE(rep.bias_in_band);
    CHECK_FALSE(rep.passed);
}

TEST_CASE("extraction efficiency") {
    CHECK(extraction_efficiency(810, 1000, 0.9) == doctest::Approx(0.9));
    CHECK_THROWS(extraction_efficiency(1, 0, 0.9));
    CHECK_THROWS(extraction_efficiency(1, 10, 0.0));
}

TEST_CASE("rate aggregation") {
    std::vector<PixelRate> rates = {
        {0, 2e6, 3e6, true},
        {1, 0.0, 5e6, false},
        {2, 4e6, 2e6, true},
        {3, 0.0, 6e6, false},
    };
    RateSummary s = aggregate_rates(rates);
    CHECK(s.coarse_total_bits_s == doctest::Approx(6e6));
    CHECK(s.fine_total_bits_s == doctest::Approx(16e6));
    CHECK(s.total_bits_s == doctest::Approx(22e6));
    CHECK(s.coarse_mean_per_pixel == doctest::Approx(1.5e6));
    CHECK(s.fine_mean_per_pixel == doctest::Approx(4e6));
    CHECK(s.coarse_mean_kept == doctest::Approx(3e6));
    CHECK(s.n_pixels == 4);
    CHECK(s.n_kept == 2);
}
