#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spadrng/bitstream.hpp"
#include "spadrng/sampling.hpp"
#include "spadrng/source_sim.hpp"

namespace spadrng::io {

// Binary formats, all little-endian, all starting with an 8-byte magic:
//
//   QRNGEVT1  u64 tick_fs, u64 count, count * u64 event ticks
//   QRNGLBL1  u64 count, count * u8 event kinds (sidecar for QRNGEVT1)
//   QRNGBIT1  u64 sample_period_fs, u64 bit count, packed bits
//             (LSB of byte 0 is bit 0)
//   QRNGTAG1  u64 frame_time_fs, u32 n_pixels, then frames until EOF;
//             each frame is n_pixels groups of u16 count followed by
//             count * (u32 coarse cycle, u8 fine code)
//
// Readers throw std::runtime_error on a bad magic, a short file, or an
// unreadable path.

void write_events(const std::string& path, const PhotonEventStream& ev);
// tick_count of the result covers the last event only; the true capture
// duration is not stored in the file and must come from the caller's config.
PhotonEventStream read_events(const std::string& path);

void write_labels(const std::string& path, const std::vector<EventKind>& labels);
std::vector<EventKind> read_labels(const std::string& path);

void write_bits(const std::string& path, const BitVector& bits,
                double sample_period_s);

struct BitsFile {
    BitVector bits;
    double sample_period_s = 0.0;
};
BitsFile read_bits(const std::string& path);

void write_tags(const std::string& path, const std::vector<TagFrame>& frames,
                double frame_time_s);

struct TagsFile {
    std::vector<TagFrame> frames;
    double frame_time_s = 0.0;
    uint32_t n_pixels = 0;
};
TagsFile read_tags(const std::string& path);

} // namespace spadrng::io
