#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spadrng/bitstream.hpp"
#include "spadrng/source_sim.hpp"

namespace spadrng {

struct SampledBitStream {
    BitVector bits;                  // bit j = comparator output at (j+1) * period
    uint64_t sample_period_ticks = 1;
    double tick_s = 0.0;

    double sample_period_s() const { return tick_s * static_cast<double>(sample_period_ticks); }
};

// Clock sampling of the detector line. The line is high during [t, t + pulse)
// for an event at tick t; bit j is 1 iff the line is high at (j+1) * period
// and was low at j * period, so a pulse spanning several clock edges yields a
// single 1. The stream has floor(duration / period) bits.
//
// Emits a warning (stderr, once per call) when pulse_width >= sample_period:
// in that regime an event can mask an immediate successor.
SampledBitStream sample_events(const PhotonEventStream& ev,
                               uint64_t sample_period_ticks,
                               uint64_t pulse_width_ticks);

// Per-pixel decomposition of tag frames. The coarse stream has one bit per
// clock cycle (frames concatenated in order); the fine stream keeps the
// converter codes in arrival order. ones(coarse[p]) == fine[p].size().
struct CoarseFineView {
    std::vector<BitVector> coarse;
    std::vector<std::vector<uint8_t>> fine;
    uint64_t frame_cycles = 0;
    uint32_t n_frames = 0;

    uint64_t tags(uint32_t pixel) const { return fine[pixel].size(); }
};

// Throws on malformed input: a coarse index beyond the frame, or two tags in
// one cycle for one pixel (impossible on hardware, the converter is busy).
CoarseFineView split_coarse_fine(const std::vector<TagFrame>& frames,
                                 uint64_t frame_cycles);

} // namespace spadrng
