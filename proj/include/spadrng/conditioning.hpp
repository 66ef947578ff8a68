#pragma once

#include <cstdint>
#include <vector>

#include "spadrng/bitstream.hpp"
#include "spadrng/sampling.hpp"
#include "spadrng/source_sim.hpp"

namespace spadrng {

// Histogram of gaps between consecutive detections, in sample periods,
// with a geometric (discretized exponential) fit of the tail. The fit is
// anchored above the 60th percentile, clear of dead-time and afterpulse
// structure (which sits far below the mean gap), and extrapolated backwards
// to score each bin.
struct InterarrivalHistogram {
    std::vector<uint64_t> counts;  // counts[g] = number of gaps of exactly g
    uint64_t n_gaps = 0;
    uint64_t floor_gap = 0;        // smallest observed gap
    double fit_q = 0.0;            // fitted per-period detection probability
    uint64_t fit_start = 0;        // tail fit used gaps >= fit_start

    // Expected count of bin g under the fitted law, scaled to n_gaps.
    double expected_count(uint64_t gap) const;

    // Kolmogorov-Smirnov distance between the empirical gap distribution
    // restricted to gaps >= from and a geometric law fitted to that same
    // restriction by its mean. Refitting on the restricted support keeps the
    // statistic free of anchor-extrapolation error, so it measures shape
    // only.
    double ks_distance(uint64_t from) const;
};

InterarrivalHistogram histogram_from_gaps(const std::vector<uint64_t>& gaps);
InterarrivalHistogram interarrival_histogram(const BitVector& bits);
InterarrivalHistogram interarrival_histogram(const PhotonEventStream& ev);

// Smallest gap g, at or above the observed floor, where the histogram
// re-enters the fitted exponential: observed within the band around the
// expected count for `run` consecutive bins, each with a statistically
// meaningful expectation. The band is the wider of the relative window
// [band_lo, band_hi] and a three-sigma Poisson allowance, so thin bins are
// not rejected on counting noise alone. Throws if no such point exists
// below the fit anchor.
uint64_t estimate_cutoff(const InterarrivalHistogram& h,
                         double band_lo = 0.9, double band_hi = 1.1,
                         unsigned run = 3, double min_expected = 25.0);

// Same scan over the summed counts of several per-pixel histograms. The
// pooled expectation is the sum of the individual tail fits, so pixels with
// unequal rates are each scored against their own law (the pooled gap
// distribution of a heterogeneous array is not geometric). Histograms with
// too few gaps for a usable fit are skipped; throws if none qualify.
uint64_t estimate_cutoff_pooled(const std::vector<InterarrivalHistogram>& hs,
                                double band_lo = 0.9, double band_hi = 1.1,
                                unsigned run = 3, double min_expected = 25.0);

// Asymptotic two-sided Kolmogorov-Smirnov critical distance at the 1 percent
// significance level for n observations.
double ks_critical_1pct(uint64_t n);

struct ConditioningReport {
    uint64_t guard = 0;
    uint64_t n_in = 0, n_out = 0;       // samples before/after removal
    uint64_t ones_in = 0, ones_out = 0; // detections before/after removal

    double samples_removed_frac() const {
        return n_in ? 1.0 - static_cast<double>(n_out) / static_cast<double>(n_in) : 0.0;
    }
    double events_lost_frac() const {
        return ones_in ? 1.0 - static_cast<double>(ones_out) / static_cast<double>(ones_in) : 0.0;
    }
    // Sampling rate left after removal, given the original rate.
    double equivalent_rate_hz(double sample_rate_hz) const {
        return sample_rate_hz * (1.0 - samples_removed_frac());
    }
};

struct GuardRemovalResult {
    BitVector bits;
    ConditioningReport report;
};

// Deletes the `guard` samples following every 1 of the input (windows are
// anchored at original positions, so a deleted 1 still shadows its
// successors) and compacts the survivors. Removal, not zeroing: correlated
// samples vanish from the stream entirely.
GuardRemovalResult remove_guard(const BitVector& bits, uint64_t guard);

// Pixel culling by measured coincidences. For every pixel pair within
// `neighborhood` indices of each other, the coincidence probability is the
// number of tag pairs landing within `window_cycles` cycles of each other,
// normalized by the smaller tag count. Pixels are then discarded greedily
// (highest offending-pair count first; ties broken by coincidence mass, then
// by tag count, so the contaminated pixel of an asymmetric pair goes first)
// until no kept pair exceeds `threshold`.
struct CoincidencePair {
    uint32_t a = 0, b = 0;
    uint64_t coincidences = 0;
    double prob = 0.0;
};

struct CullResult {
    std::vector<uint32_t> kept;   // ascending pixel indices
    std::vector<uint32_t> culled;
    std::vector<CoincidencePair> pairs; // all measured pairs, for reporting
};

CullResult cull_pixels(const CoarseFineView& view, uint64_t window_cycles,
                       double threshold, uint32_t neighborhood = 3);

} // namespace spadrng
