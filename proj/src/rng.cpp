#include "spadrng/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spadrng {

namespace {

// splitmix64 finalizer, used only to spread seed/pixel/kind into
// well-separated generator seeds.
uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

uint64_t derive_stream_seed(uint64_t seed, uint64_t pixel, StreamKind kind) {
    uint64_t h = mix64(seed);
    h = mix64(h ^ (pixel + 0x51ED270B9D1C2D4Bull));
    h = mix64(h ^ (static_cast<uint64_t>(kind) * 0xC2B2AE3D27D4EB4Full));
    return h;
}

uint64_t Rng::uniform_int(uint64_t lo, uint64_t hi) {
    if (lo > hi) throw std::invalid_argument("Rng::uniform_int: lo > hi");
    uint64_t range = hi - lo + 1; // range == 0 means the full 2^64 span
    if (range == 0) return gen_();
    // Multiply-shift mapping; bias is below 2^-64 per draw for the small
    // ranges used here (afterpulse offsets).
    unsigned __int128 prod = static_cast<unsigned __int128>(gen_()) * range;
    return lo + static_cast<uint64_t>(prod >> 64);
}

uint64_t Rng::exp_gap_ticks(double rate_per_tick) {
    if (!(rate_per_tick > 0.0))
        throw std::invalid_argument("Rng::exp_gap_ticks: rate must be positive");
    double u = uniform01();                   // [0, 1)
    double e = -std::log1p(-u) / rate_per_tick; // [0, inf)
    if (e >= 9.0e18) return uint64_t{9000000000000000000ull};
    return static_cast<uint64_t>(e) + 1;
}

DiscreteSampler::DiscreteSampler(const std::vector<double>& weights) {
    if (weights.empty())
        throw std::invalid_argument("DiscreteSampler: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w))
            throw std::invalid_argument("DiscreteSampler: weights must be finite and >= 0");
        total += w;
    }
    if (total <= 0.0)
        throw std::invalid_argument("DiscreteSampler: weights sum to zero");
    cdf_.resize(weights.size());
    probs_.resize(weights.size());
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        cdf_[i] = acc / total;
        probs_[i] = weights[i] / total;
    }
    cdf_.back() = 1.0; // guard against rounding
}

unsigned DiscreteSampler::sample(Rng& rng) const {
    double u = rng.uniform01();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<unsigned>(it - cdf_.begin());
}

} // namespace spadrng
