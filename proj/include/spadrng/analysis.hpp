#pragma once

#include <cstdint>
#include <vector>

#include "spadrng/bitstream.hpp"
#include "spadrng/extraction.hpp"

namespace spadrng {

// Shannon entropy of a {p, 1-p} coin, in bits. Domain [0, 1]; both endpoints
// give 0.
double binary_entropy(double p);

// Plug-in entropy estimate, in bits per symbol, from occurrence counts.
double empirical_entropy(const std::vector<uint64_t>& counts);
double empirical_entropy(const SymbolStream& s);

struct RatePoint {
    double sampling_hz = 0.0;
    double p1 = 0.0;              // probability a sampled bit is 1
    double entropy_bits = 0.0;    // per sampled bit
    double rate_bits_s = 0.0;     // sampling_hz * entropy_bits
    double effective_rate_bits_s = 0.0; // after the stated conditioning loss
};

// Entropy throughput of comparator sampling at the given frequencies, for a
// Poisson source of the given mean count rate. loss_fraction models samples
// discarded downstream (guard removal).
std::vector<RatePoint> rate_curve(double photon_rate_hz,
                                  const std::vector<double>& sampling_hz,
                                  double loss_fraction = 0.0);

// Sampling frequency that maximizes f * H(p1(f)); equals rate / ln 2.
double peak_entropy_frequency(double photon_rate_hz);

struct CorrelationReport {
    std::vector<double> r;   // r[k-1] is the lag-k autocorrelation
    double band_1sigma = 0.0; // 1/sqrt(n) expectation band for i.i.d. input
    double band_99 = 0.0;     // 2.576/sqrt(n), the 99% two-sided band
    unsigned worst_lag = 0;
    double worst_abs = 0.0;
    bool all_in_band = false; // every lag within its own 99% band
};

// Exact sample autocorrelation of the bit sequence at lags 1..max_lag,
// mean-subtracted and normalized per lag. Runs on packed words.
CorrelationReport serial_correlation(const BitVector& bits, unsigned max_lag = 100);

struct BitReport {
    uint64_t n_bits = 0;
    uint64_t ones = 0;
    double bias = 0.0;     // ones/n - 1/2
    double entropy = 0.0;  // binary entropy of the ones fraction
    CorrelationReport corr;
    bool bias_in_band = false; // |bias| within the 99% binomial band
    bool passed = false;       // bias_in_band and corr.all_in_band
};

BitReport analyze_bits(const BitVector& bits, unsigned max_lag = 100);

// Output bits per bit of input entropy; 1 is the information-theoretic
// ceiling for a lossless extractor on i.i.d. input.
double extraction_efficiency(uint64_t bits_out, uint64_t n_symbols,
                             double entropy_per_symbol);

struct PixelRate {
    uint32_t pixel = 0;
    double coarse_bits_s = 0.0;
    double fine_bits_s = 0.0;
    bool kept = true;
};

struct RateSummary {
    double coarse_total_bits_s = 0.0;
    double fine_total_bits_s = 0.0;
    double total_bits_s = 0.0;
    double coarse_mean_per_pixel = 0.0; // totals divided by the full pixel count
    double fine_mean_per_pixel = 0.0;
    double coarse_mean_kept = 0.0;      // mean over kept pixels only
    uint32_t n_pixels = 0;
    uint32_t n_kept = 0;
};

RateSummary aggregate_rates(const std::vector<PixelRate>& rates);

} // namespace spadrng
