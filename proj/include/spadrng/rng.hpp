#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace spadrng {

// Sub-stream labels for seed derivation. Each (seed, pixel, kind) triple
// yields an independent generator, so per-pixel work can run in any order
// (or in parallel) and still produce identical output.
enum class StreamKind : uint64_t {
    Photon = 1,
    Dark = 2,
    Afterpulse = 3,
    Crosstalk = 4,
    Tdc = 5,
    Reference = 6,
};

uint64_t derive_stream_seed(uint64_t seed, uint64_t pixel, StreamKind kind);

// Deterministic random stream. All stochastic draws in the simulator go
// through this wrapper; distributions are implemented here rather than with
// std:: distributions so results do not depend on the standard library.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [lo, hi], inclusive.
    uint64_t uniform_int(uint64_t lo, uint64_t hi);

    // Gap to the next event of a Poisson process with the given per-tick
    // rate, quantized to whole ticks: gap = floor(Exp(rate)) + 1, which is
    // the exact geometric law of a Bernoulli(1 - e^-rate) process per tick.
    uint64_t exp_gap_ticks(double rate_per_tick);

private:
    std::mt19937_64 gen_;
};

// Samples an index with probability proportional to the given weights.
// Inverse-CDF with binary search; weights need not be normalized.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const std::vector<double>& weights);

    unsigned sample(Rng& rng) const;

    const std::vector<double>& probabilities() const { return probs_; }

private:
    std::vector<double> cdf_;
    std::vector<double> probs_;
};

} // namespace spadrng
