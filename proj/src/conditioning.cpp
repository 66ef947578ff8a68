#include "spadrng/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spadrng {

namespace {

constexpr uint64_t kMaxHistogramRange = uint64_t{1} << 24;

// Band membership in count space: the wider of the relative window and a
// three-sigma Poisson allowance, so sparse bins are judged on their actual
// statistical resolution.
bool in_band(double observed, double expected, double band_lo, double band_hi) {
    const double rel = std::max(band_hi - 1.0, 1.0 - band_lo);
    const double slack = std::max(rel * expected, 3.0 * std::sqrt(expected));
    return std::abs(observed - expected) <= slack;
}

template <typename ExpectedAt, typename ObservedAt>
uint64_t cutoff_scan(ExpectedAt&& expected_at, ObservedAt&& observed_at,
                     uint64_t floor, uint64_t size, double band_lo,
                     double band_hi, unsigned run, double min_expected) {
    for (uint64_t g = floor; g + run <= size; ++g) {
        bool ok = true;
        for (unsigned k = 0; k < run && ok; ++k) {
            double expected = expected_at(g + k);
            if (expected < min_expected) {
                // Bins out here are too thin to score; if no cross-point was
                // found by now the histogram never re-enters the band.
                ok = false;
                g = size; // force loop exit
                break;
            }
            ok = in_band(static_cast<double>(observed_at(g + k)), expected,
                         band_lo, band_hi);
        }
        if (ok && g < size) return g;
    }
    throw std::runtime_error("estimate_cutoff: no cross-point found within the scored range");
}

} // namespace

double InterarrivalHistogram::expected_count(uint64_t gap) const {
    // Tail-anchored extrapolation: matches the observed counts in the fitted
    // region and predicts what an artifact-free detector would have put in
    // the earlier bins.
    double n_tail = 0.0;
    for (uint64_t g = fit_start; g < counts.size(); ++g)
        n_tail += static_cast<double>(counts[g]);
    double delta = static_cast<double>(gap) - static_cast<double>(fit_start);
    return n_tail * fit_q * std::pow(1.0 - fit_q, delta);
}

double InterarrivalHistogram::ks_distance(uint64_t from) const {
    if (counts.empty()) return 1.0;
    uint64_t n = 0;
    double excess = 0.0;
    for (uint64_t g = from; g < counts.size(); ++g) {
        n += counts[g];
        excess += static_cast<double>(counts[g]) * static_cast<double>(g - from);
    }
    if (n == 0) return 1.0;
    // Maximum-likelihood geometric parameter for the restricted sample.
    const double q = 1.0 / (1.0 + excess / static_cast<double>(n));
    double d = 0.0, cum = 0.0;
    for (uint64_t g = from; g < counts.size(); ++g) {
        // Fitted CDF conditional on gap >= from, both sides of each step.
        double f_lo = 1.0 - std::pow(1.0 - q, static_cast<double>(g - from));
        double f_hi = 1.0 - std::pow(1.0 - q, static_cast<double>(g - from + 1));
        d = std::max(d, std::abs(cum / static_cast<double>(n) - f_lo));
        cum += static_cast<double>(counts[g]);
        d = std::max(d, std::abs(cum / static_cast<double>(n) - f_hi));
    }
    return d;
}

InterarrivalHistogram histogram_from_gaps(const std::vector<uint64_t>& gaps) {
    InterarrivalHistogram h;
    h.n_gaps = gaps.size();
    if (gaps.empty()) return h;

    uint64_t max_gap = *std::max_element(gaps.begin(), gaps.end());
    if (max_gap >= kMaxHistogramRange)
        throw std::invalid_argument("histogram_from_gaps: gap range too large to bin");
    h.counts.assign(max_gap + 1, 0);
    for (uint64_t g : gaps) ++h.counts[g];
    h.floor_gap = *std::min_element(gaps.begin(), gaps.end());

    // Anchor the fit above the 60th percentile, clear of dead time and
    // afterpulse structure, and use memorylessness: excess over the anchor is
    // plain geometric, ML estimate q = 1 / (1 + mean excess). The anchor
    // stays low enough that the estimate keeps most of the sample; parameter
    // noise enters the back-extrapolation exponentially.
    uint64_t cum = 0;
    uint64_t t0 = h.floor_gap;
    for (uint64_t g = 0; g < h.counts.size(); ++g) {
        cum += h.counts[g];
        if (10 * cum >= 6 * h.n_gaps) {
            t0 = g;
            break;
        }
    }
    h.fit_start = t0;
    uint64_t n_tail = 0;
    double excess = 0.0;
    for (uint64_t g = t0; g < h.counts.size(); ++g) {
        n_tail += h.counts[g];
        excess += static_cast<double>(h.counts[g]) * static_cast<double>(g - t0);
    }
    if (n_tail > 0)
        h.fit_q = 1.0 / (1.0 + excess / static_cast<double>(n_tail));
    return h;
}

InterarrivalHistogram interarrival_histogram(const BitVector& bits) {
    std::vector<uint64_t> gaps;
    gaps.reserve(bits.count_ones());
    uint64_t prev = 0;
    bool has_prev = false;
    bits.for_each_one([&](uint64_t pos) {
        if (has_prev) gaps.push_back(pos - prev);
        prev = pos;
        has_prev = true;
    });
    return histogram_from_gaps(gaps);
}

InterarrivalHistogram interarrival_histogram(const PhotonEventStream& ev) {
    std::vector<uint64_t> gaps;
    if (ev.t.size() > 1) {
        gaps.reserve(ev.t.size() - 1);
        for (size_t i = 1; i < ev.t.size(); ++i) gaps.push_back(ev.t[i] - ev.t[i - 1]);
    }
    return histogram_from_gaps(gaps);
}

uint64_t estimate_cutoff(const InterarrivalHistogram& h, double band_lo,
                         double band_hi, unsigned run, double min_expected) {
    if (h.n_gaps < 100 || h.counts.empty())
        throw std::invalid_argument("estimate_cutoff: histogram too sparse");
    if (!(h.fit_q > 0.0) || h.fit_q >= 1.0)
        throw std::invalid_argument("estimate_cutoff: degenerate tail fit");
    if (run == 0) throw std::invalid_argument("estimate_cutoff: run must be >= 1");

    auto expected_at = [&h](uint64_t g) { return h.expected_count(g); };
    auto observed_at = [&h](uint64_t g) {
        return g < h.counts.size() ? h.counts[g] : 0;
    };
    return cutoff_scan(expected_at, observed_at, h.floor_gap, h.counts.size(),
                       band_lo, band_hi, run, min_expected);
}

uint64_t estimate_cutoff_pooled(const std::vector<InterarrivalHistogram>& hs,
                                double band_lo, double band_hi, unsigned run,
                                double min_expected) {
    if (run == 0) throw std::invalid_argument("estimate_cutoff: run must be >= 1");
    std::vector<const InterarrivalHistogram*> use;
    uint64_t floor = 0, size = 0;
    for (const InterarrivalHistogram& h : hs) {
        if (h.n_gaps < 100 || h.counts.empty() || !(h.fit_q > 0.0) || h.fit_q >= 1.0)
            continue;
        if (use.empty() || h.floor_gap < floor) floor = h.floor_gap;
        size = std::max<uint64_t>(size, h.counts.size());
        use.push_back(&h);
    }
    if (use.empty())
        throw std::invalid_argument("estimate_cutoff_pooled: no usable histogram");

    auto expected_at = [&use](uint64_t g) {
        double e = 0.0;
        for (const InterarrivalHistogram* h : use) e += h->expected_count(g);
        return e;
    };
    auto observed_at = [&use](uint64_t g) {
        uint64_t c = 0;
        for (const InterarrivalHistogram* h : use)
            if (g < h->counts.size()) c += h->counts[g];
        return c;
    };
    return cutoff_scan(expected_at, observed_at, floor, size, band_lo, band_hi,
                       run, min_expected);
}

double ks_critical_1pct(uint64_t n) {
    if (n == 0) throw std::invalid_argument("ks_critical_1pct: empty sample");
    return 1.62762 / std::sqrt(static_cast<double>(n));
}

GuardRemovalResult remove_guard(const BitVector& bits, uint64_t guard) {
    GuardRemovalResult res;
    const uint64_t n = bits.size();
    res.report.guard = guard;
    res.report.n_in = n;

    std::vector<uint64_t> out_ones;
    uint64_t deleted = 0;
    bool cur_open = false;
    uint64_t cur_start = 0, cur_end = 0;

    bits.for_each_one([&](uint64_t p) {
        ++res.report.ones_in;
        if (cur_open && cur_end < p) {
            deleted += cur_end - cur_start + 1;
            cur_open = false;
        }
        bool survives = !(cur_open && p <= cur_end);
        if (survives) out_ones.push_back(p - deleted);
        if (guard > 0 && p + 1 < n) {
            uint64_t s = p + 1;
            uint64_t e = std::min(p + guard, n - 1);
            if (cur_open) {
                cur_end = std::max(cur_end, e);
            } else {
                cur_open = true;
                cur_start = s;
                cur_end = e;
            }
        }
    });
    if (cur_open) deleted += cur_end - cur_start + 1;

    res.report.n_out = n - deleted;
    res.report.ones_out = out_ones.size();
    res.bits = BitVector::zeros(res.report.n_out);
    for (uint64_t q : out_ones) res.bits.set(q);
    return res;
}

CullResult cull_pixels(const CoarseFineView& view, uint64_t window_cycles,
                       double threshold, uint32_t neighborhood) {
    const uint32_t n = static_cast<uint32_t>(view.coarse.size());
    CullResult res;
    if (n == 0) return res;
    if (!(threshold > 0.0))
        throw std::invalid_argument("cull_pixels: threshold must be positive");
    if (neighborhood == 0)
        throw std::invalid_argument("cull_pixels: neighborhood must be >= 1");

    std::vector<std::vector<uint64_t>> times(n);
    for (uint32_t p = 0; p < n; ++p) times[p] = view.coarse[p].one_positions();

    // Coincidence probability per pair: fraction of the quieter pixel's tags
    // that have a partner within the window on the other pixel.
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = i + 1; j < std::min(n, i + neighborhood + 1); ++j) {
            const std::vector<uint64_t>& small = times[i].size() <= times[j].size() ? times[i] : times[j];
            const std::vector<uint64_t>& big = times[i].size() <= times[j].size() ? times[j] : times[i];
            if (small.empty()) {
                res.pairs.push_back({i, j, 0, 0.0});
                continue;
            }
            uint64_t matched = 0;
            size_t bi = 0;
            for (uint64_t a : small) {
                while (bi < big.size() && big[bi] + window_cycles < a) ++bi;
                if (bi < big.size() && big[bi] <= a + window_cycles) ++matched;
            }
            res.pairs.push_back(
                {i, j, matched, static_cast<double>(matched) / static_cast<double>(small.size())});
        }
    }

    std::vector<uint64_t> tag_counts(n);
    for (uint32_t p = 0; p < n; ++p) tag_counts[p] = times[p].size();

    std::vector<bool> culled(n, false);
    for (;;) {
        // Degree, coincidence mass and offending status over kept pairs.
        std::vector<uint32_t> degree(n, 0);
        std::vector<double> mass(n, 0.0);
        bool any = false;
        for (const CoincidencePair& pr : res.pairs) {
            if (culled[pr.a] || culled[pr.b] || pr.prob <= threshold) continue;
            any = true;
            ++degree[pr.a];
            ++degree[pr.b];
            mass[pr.a] += pr.prob;
            mass[pr.b] += pr.prob;
        }
        if (!any) break;
        uint32_t victim = 0;
        bool have = false;
        for (uint32_t p = 0; p < n; ++p) {
            if (culled[p] || degree[p] == 0) continue;
            if (!have) {
                victim = p;
                have = true;
                continue;
            }
            auto key = [&](uint32_t v) {
                return std::make_tuple(degree[v], mass[v], tag_counts[v], v);
            };
            if (key(p) > key(victim)) victim = p;
        }
        culled[victim] = true;
    }

    for (uint32_t p = 0; p < n; ++p)
        (culled[p] ? res.culled : res.kept).push_back(p);
    return res;
}

} // namespace spadrng
