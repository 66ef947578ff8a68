#pragma once

#include <cstdint>
#include <vector>

#include "spadrng/rng.hpp"

namespace spadrng {

// All event times are integer ticks. One tick is the fundamental time
// resolution of a configuration (10 ns for the single-detector setup,
// 2.5 ns / 140 for the array's sub-cycle resolution); everything downstream
// of the generator works in ticks and converts to seconds only at the edges.

struct SimConfig {
    double photon_rate_hz = 200e3;
    double duration_s = 1.0;
    double tick_s = 10e-9;
    uint64_t seed = 1;

    uint64_t duration_ticks() const;
    double rate_per_tick() const { return photon_rate_hz * tick_s; }
    void validate() const; // throws std::invalid_argument
};

enum class EventKind : uint8_t { True = 0, Afterpulse = 1, Crosstalk = 2 };

struct PhotonEventStream {
    double tick_s = 0.0;
    uint64_t tick_count = 0;          // stream covers ticks [0, tick_count)
    std::vector<uint64_t> t;          // strictly increasing event ticks
    std::vector<EventKind> label;     // truth label per event

    size_t size() const { return t.size(); }
    void validate() const;
};

struct DetectorModel {
    uint64_t dead_time_ticks = 3;
    uint64_t pulse_width_ticks = 1;
    double afterpulse_prob = 0.0;       // per accepted avalanche
    uint64_t afterpulse_window_ticks = 18;
    double dark_rate_hz = 0.0;

    void validate() const;
};

// Homogeneous Poisson arrivals quantized to ticks. Interarrival gaps are
// i.i.d. floor(Exp) + 1, i.e. the exact discretization of the continuous
// process onto the tick lattice. All events are labeled True.
PhotonEventStream gen_poisson_arrivals(const SimConfig& cfg);

// Detector non-idealities applied to an arrival stream:
//  - dark counts merged in as an independent Poisson stream,
//  - dead time: an event closer than dead_time_ticks to the previously
//    accepted event is dropped (gap == dead_time is accepted),
//  - afterpulses: each accepted avalanche spawns, with afterpulse_prob, a
//    spurious event at a uniform offset in (dead_time, afterpulse_window];
//    afterpulses are themselves avalanches and can afterpulse again.
// Input labels are preserved; dark counts are indistinguishable from photons
// and carry the True label.
PhotonEventStream apply_detector(const PhotonEventStream& in,
                                 const DetectorModel& det, uint64_t seed);

// ---------------------------------------------------------------------------
// Pixel array with per-pixel time-to-digital converters.

struct TdcProfile {
    // Relative weight of each fine code; weight 0 marks a code the converter
    // never emits. Size is the code alphabet (140 for the default device).
    std::vector<double> bin_weights;

    unsigned alphabet() const { return static_cast<unsigned>(bin_weights.size()); }
    double entropy_bits() const;
    std::vector<unsigned> missing_codes() const;
    void validate() const;

    static TdcProfile uniform(unsigned alphabet);
    // Calibrated default: dead low codes plus a period-4 carry-chain bias,
    // Shannon entropy ~6.82 bits over 140 codes.
    static TdcProfile linospad_default();
};

struct CrosstalkLink {
    uint32_t source = 0;   // must be < target: injection is one-directional
    uint32_t target = 0;
    double prob = 0.0;     // per accepted avalanche of the source pixel
};

struct ArrayConfig {
    uint32_t n_pixels = 256;   // full sensor
    uint32_t n_tdc = 64;       // converters; one bank of n_tdc pixels is live
    double frame_time_s = 320e-6;
    uint32_t n_frames = 8000;
    uint32_t buffer_cap = 512; // tags kept per pixel per frame
    double tick_s = 2.5e-9 / 140.0;
    uint32_t cycle_ticks = 140; // clock cycle length in ticks
    std::vector<double> pixel_rate_hz;      // size n_tdc, photon rate per pixel
    std::vector<CrosstalkLink> crosstalk;
    TdcProfile tdc;
    DetectorModel detector;

    uint64_t frame_ticks() const;
    uint64_t frame_cycles() const { return frame_ticks() / cycle_ticks; }
    void validate() const;
};

struct Tag {
    uint32_t coarse = 0; // cycle index within the frame
    uint8_t fine = 0;    // converter code
};

struct TagFrame {
    std::vector<std::vector<Tag>> pixels; // [n_tdc][tags in time order]
    std::vector<uint8_t> saturated;       // buffer filled before frame end
};

struct ArrayResult {
    std::vector<TagFrame> frames;
    // Truth bookkeeping (per pixel), for validation only; real hardware has
    // no access to these.
    std::vector<uint64_t> true_counts;
    std::vector<uint64_t> afterpulse_counts;
    std::vector<uint64_t> crosstalk_counts;
};

// Simulates the live bank pixel by pixel. Crosstalk links inject the source
// pixel's accepted avalanches into the target's arrival stream (source <
// target, so a single index-ordered pass resolves all injections). Per-pixel
// generator streams are derived from (seed, pixel), making the result
// independent of evaluation order.
ArrayResult simulate_array(const ArrayConfig& cfg, uint64_t seed);

} // namespace spadrng
