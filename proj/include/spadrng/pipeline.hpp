#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spadrng/analysis.hpp"
#include "spadrng/bitstream.hpp"
#include "spadrng/conditioning.hpp"
#include "spadrng/extraction.hpp"
#include "spadrng/sampling.hpp"
#include "spadrng/source_sim.hpp"

namespace spadrng {

enum class ExtractorKind { VonNeumann, Peres, ZhouBruck, Diff, OdEven };

const char* extractor_name(ExtractorKind k);
ExtractorKind extractor_from_name(const std::string& name);

struct ConditioningConfig {
    bool auto_guard = true;   // estimate the guard from the gap histogram
    uint64_t guard = 0;       // used verbatim when auto_guard is false
    double band_lo = 0.9;
    double band_hi = 1.1;
    double cull_threshold = 0.02;
    uint64_t cull_window_cycles = 2;
    uint32_t cull_neighborhood = 3;
};

struct PipelineConfig {
    std::string mode = "randy"; // "randy" or "linospad"
    uint64_t seed = 1;
    ExtractorKind extractor = ExtractorKind::Peres;
    unsigned max_depth = 32;
    uint64_t sample_period_ticks = 1;
    uint64_t odeven_interval_ticks = 5000;
    SimConfig sim;
    DetectorModel detector;
    ArrayConfig array;
    ConditioningConfig conditioning;
    unsigned threads = 0; // 0 picks the hardware count

    void validate() const;
};

// Calibrated single-detector configuration: 100 MHz comparator sampling of a
// passively quenched SPAD at about 200 kcps detected, 30 ns dead time,
// 11 percent afterpulsing inside 180 ns.
PipelineConfig randy_preset();

// Calibrated 64-pixel array configuration: 320 us frames, 2.5 ns clock with
// 140 fine codes per cycle, per-pixel rates descending across the bank with
// a few hot outliers, and optical crosstalk clusters on the lower 56 pixels.
PipelineConfig linospad_preset();

struct RandyResult {
    uint64_t n_detected = 0;
    double detected_rate_hz = 0.0;
    uint64_t guard = 0;
    ConditioningReport conditioning;
    InterarrivalHistogram histogram; // sampled-stream gaps before conditioning
    double survivor_rate_hz = 0.0;
    double loss_fraction = 0.0;
    double effective_sample_hz = 0.0;
    double p1 = 0.0;                  // ones fraction after conditioning
    double expected_rate_bits_s = 0.0; // effective_sample_hz * H(p1)
    ExtractorStats extractor_stats;
    BitVector bits;
    double bits_per_second = 0.0;
    BitReport report;
    double ks_statistic = 0.0; // conditioned gaps against the fitted law
    double ks_critical = 0.0;
    bool ks_pass = false;
    double wall_seconds = 0.0;
};

// Full single-detector pipeline: simulate (or take pre-detected events),
// comparator-sample, estimate and apply the guard, extract, analyze.
// The comparator baselines consume the event stream directly and skip
// conditioning. When `pre_detected` is given it replaces simulation and its
// capture duration is taken from the config.
RandyResult run_randy(const PipelineConfig& cfg,
                      const PhotonEventStream* pre_detected = nullptr);

struct PixelOutcome {
    uint32_t pixel = 0;
    bool kept = true;
    uint64_t n_tags = 0;
    uint64_t coarse_bits = 0;
    uint64_t fine_bits = 0;
    double coarse_bits_s = 0.0;
    double fine_bits_s = 0.0;
    double fine_efficiency = 0.0; // against the converter profile entropy
    ExtractorStats coarse_stats;
    ExtractorStats fine_stats;
};

struct LinospadResult {
    uint64_t n_frames = 0;
    double live_time_s = 0.0;
    uint64_t total_tags = 0;
    double mean_tag_rate_hz = 0.0; // per pixel
    CullResult cull;
    uint64_t guard_cycles = 0;
    InterarrivalHistogram pooled_histogram; // per-pixel gaps, pooled
    double tdc_entropy_bits = 0.0;
    std::vector<PixelOutcome> pixels;
    RateSummary rates;
    BitVector coarse_bits;
    BitVector fine_bits;
    BitReport coarse_report;
    BitReport fine_report;
    double wall_seconds = 0.0;
};

// Full array pipeline: simulate (or take recorded tag frames), split tags
// into per-pixel coarse timing streams and fine codes, estimate the guard
// from the pooled gap histogram, cull crosstalk-coupled pixels, then run the
// iterated von Neumann extractor per kept pixel on the coarse lane and the
// multi-level extractor on every pixel's fine codes.
LinospadResult run_linospad(const PipelineConfig& cfg,
                            const std::vector<TagFrame>* pre_recorded = nullptr);

// JSON round-trip. parse_config accepts either a bare config object or a
// manifest object carrying the config under a "config" key.
PipelineConfig parse_config(const std::string& json_text,
                            const PipelineConfig& base = PipelineConfig{});
std::string config_json(const PipelineConfig& cfg, int indent = 2);
std::string manifest_json(const PipelineConfig& cfg,
                          const std::vector<std::string>& outputs,
                          int indent = 2);
std::string report_json(const RandyResult& r, int indent = 2);
std::string report_json(const LinospadResult& r, int indent = 2);

} // namespace spadrng
