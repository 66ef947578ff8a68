#include "spadrng/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace spadrng {

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("binary_entropy: p must be in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double empirical_entropy(const std::vector<uint64_t>& counts) {
    uint64_t n = 0;
    for (uint64_t c : counts) n += c;
    if (n == 0) throw std::invalid_argument("empirical_entropy: no observations");
    double h = 0.0;
    for (uint64_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log2(p);
    }
    return h;
}

double empirical_entropy(const SymbolStream& s) {
    std::vector<uint64_t> counts(s.alphabet, 0);
    for (uint16_t sym : s.symbols) {
        if (sym >= s.alphabet)
            throw std::invalid_argument("empirical_entropy: symbol outside alphabet");
        ++counts[sym];
    }
    return empirical_entropy(counts);
}

std::vector<RatePoint> rate_curve(double photon_rate_hz,
                                  const std::vector<double>& sampling_hz,
                                  double loss_fraction) {
    if (!(photon_rate_hz >= 0.0) || !std::isfinite(photon_rate_hz))
        throw std::invalid_argument("rate_curve: bad photon rate");
    if (!(loss_fraction >= 0.0 && loss_fraction <= 1.0))
        throw std::invalid_argument("rate_curve: loss fraction must be in [0, 1]");
    std::vector<RatePoint> out;
    out.reserve(sampling_hz.size());
    for (double f : sampling_hz) {
        if (!(f > 0.0) || !std::isfinite(f))
            throw std::invalid_argument("rate_curve: sampling frequency must be positive");
        RatePoint pt;
        pt.sampling_hz = f;
        pt.p1 = -std::expm1(-photon_rate_hz / f);
        pt.entropy_bits = binary_entropy(pt.p1);
        pt.rate_bits_s = f * pt.entropy_bits;
        pt.effective_rate_bits_s = (1.0 - loss_fraction) * pt.rate_bits_s;
        out.push_back(pt);
    }
    return out;
}

double peak_entropy_frequency(double photon_rate_hz) {
    if (!(photon_rate_hz > 0.0))
        throw std::invalid_argument("peak_entropy_frequency: rate must be positive");
    return photon_rate_hz / std::log(2.0);
}

namespace {

// Sum over i < m of bit(i) & bit(i + k), on packed words.
uint64_t overlap_count(const std::vector<uint64_t>& w, uint64_t m, unsigned k) {
    const uint64_t d = k >> 6;
    const unsigned r = k & 63;
    const size_t nw = w.size();
    uint64_t total = 0;
    for (uint64_t wi = 0; wi * 64 < m; ++wi) {
        const uint64_t lo = wi + d < nw ? w[wi + d] : 0;
        const uint64_t hi = wi + d + 1 < nw ? w[wi + d + 1] : 0;
        const uint64_t shifted = r ? (lo >> r) | (hi << (64 - r)) : lo;
        uint64_t a = w[wi];
        const uint64_t rem = m - wi * 64;
        if (rem < 64) a &= (uint64_t{1} << rem) - 1;
        total += static_cast<uint64_t>(std::popcount(a & shifted));
    }
    return total;
}

uint64_t ones_in_prefix(const BitVector& bits, uint64_t k) {
    uint64_t c = 0;
    for (uint64_t i = 0; i < k; ++i) c += bits.get(i);
    return c;
}

uint64_t ones_in_suffix(const BitVector& bits, uint64_t k) {
    uint64_t c = 0;
    for (uint64_t i = bits.size() - k; i < bits.size(); ++i) c += bits.get(i);
    return c;
}

} // namespace

CorrelationReport serial_correlation(const BitVector& bits, unsigned max_lag) {
    CorrelationReport rep;
    const uint64_t n = bits.size();
    if (n < 3 || max_lag == 0) return rep;
    if (max_lag > n - 2) max_lag = static_cast<unsigned>(n - 2);

    const uint64_t s1 = bits.count_ones();
    rep.r.resize(max_lag, 0.0);
    rep.band_1sigma = 1.0 / std::sqrt(static_cast<double>(n));
    rep.band_99 = 2.576 / std::sqrt(static_cast<double>(n));
    rep.all_in_band = true;

    for (unsigned k = 1; k <= max_lag; ++k) {
        const uint64_t m = n - k;
        const uint64_t c = overlap_count(bits.words(), m, k);
        const uint64_t s_head = s1 - ones_in_suffix(bits, k);
        const uint64_t s_tail = s1 - ones_in_prefix(bits, k);
        const double md = static_cast<double>(m);
        const double sh = static_cast<double>(s_head);
        const double st = static_cast<double>(s_tail);
        const double num = md * static_cast<double>(c) - sh * st;
        const double den = std::sqrt(sh * (md - sh)) * std::sqrt(st * (md - st));
        // Rounding in the two square roots can push a perfect correlation a
        // few ulp past unity; the true value is bounded by 1.
        const double rk = den > 0.0 ? std::clamp(num / den, -1.0, 1.0) : 0.0;
        rep.r[k - 1] = rk;
        if (std::abs(rk) > rep.worst_abs) {
            rep.worst_abs = std::abs(rk);
            rep.worst_lag = k;
        }
        if (std::abs(rk) > 2.576 / std::sqrt(md)) rep.all_in_band = false;
    }
    return rep;
}

BitReport analyze_bits(const BitVector& bits, unsigned max_lag) {
    BitReport rep;
    rep.n_bits = bits.size();
    if (rep.n_bits == 0) return rep;
    rep.ones = bits.count_ones();
    const double p = static_cast<double>(rep.ones) / static_cast<double>(rep.n_bits);
    rep.bias = p - 0.5;
    rep.entropy = binary_entropy(p);
    rep.corr = serial_correlation(bits, max_lag);
    rep.bias_in_band =
        std::abs(rep.bias) <= 2.576 * 0.5 / std::sqrt(static_cast<double>(rep.n_bits));
    rep.passed = rep.bias_in_band && rep.corr.all_in_band;
    return rep;
}

double extraction_efficiency(uint64_t bits_out, uint64_t n_symbols,
                             double entropy_per_symbol) {
    const double denom = static_cast<double>(n_symbols) * entropy_per_symbol;
    if (!(denom > 0.0))
        throw std::invalid_argument("extraction_efficiency: no input entropy");
    return static_cast<double>(bits_out) / denom;
}

RateSummary aggregate_rates(const std::vector<PixelRate>& rates) {
    RateSummary s;
    s.n_pixels = static_cast<uint32_t>(rates.size());
    double kept_coarse = 0.0;
    for (const PixelRate& r : rates) {
        s.coarse_total_bits_s += r.coarse_bits_s;
        s.fine_total_bits_s += r.fine_bits_s;
        if (r.kept) {
            ++s.n_kept;
            kept_coarse += r.coarse_bits_s;
        }
    }
    s.total_bits_s = s.coarse_total_bits_s + s.fine_total_bits_s;
    if (s.n_pixels > 0) {
        s.coarse_mean_per_pixel = s.coarse_total_bits_s / s.n_pixels;
        s.fine_mean_per_pixel = s.fine_total_bits_s / s.n_pixels;
    }
    if (s.n_kept > 0) s.coarse_mean_kept = kept_coarse / s.n_kept;
    return s;
}

} // namespace spadrng
