#pragma once

#include <cstdint>
#include <vector>

#include "spadrng/bitstream.hpp"
#include "spadrng/source_sim.hpp"

namespace spadrng {

// Bookkeeping for one extractor invocation. from_vn / from_u / from_v split
// the output by top-level origin: bits emitted directly by the first
// von Neumann pass versus bits recovered from the XOR and shared-bit
// subsequences (including everything below them).
struct ExtractorStats {
    uint64_t n_in = 0;
    uint64_t n_out = 0;
    unsigned depth_reached = 0;
    uint64_t from_vn = 0;
    uint64_t from_u = 0;
    uint64_t from_v = 0;
};

// Classic von Neumann debiasing: consume non-overlapping pairs, map 01 -> 0
// and 10 -> 1, drop equal pairs. Output is exactly unbiased and independent
// when the input is i.i.d.
BitVector von_neumann(const BitVector& in, ExtractorStats* stats = nullptr);

// Iterated von Neumann extractor. Each level emits the von Neumann bits of
// the current sequence, then recurses on the pairwise-XOR sequence and on the
// shared bits of equal pairs. max_depth counts levels; max_depth == 1
// degenerates to plain von Neumann. Asymptotically extracts the full Shannon
// entropy of an i.i.d. biased source as depth grows.
BitVector peres(const BitVector& in, unsigned max_depth = 32,
                ExtractorStats* stats = nullptr);

// Symbols drawn from {0, ..., alphabet - 1}.
struct SymbolStream {
    std::vector<uint16_t> symbols;
    uint32_t alphabet = 2;
};

// Generalized extractor for non-binary i.i.d. symbols. Symbols are expanded
// to ceil(log2(alphabet)) bits, most significant first; for each bit
// position the stream is partitioned by the preceding bit prefix so every
// partition is i.i.d. Bernoulli, then each partition runs through the
// iterated von Neumann extractor. Partitions are concatenated position-major,
// prefix ascending. alphabet == 2 reduces to peres() on the raw bits.
BitVector zhou_bruck(const SymbolStream& in, unsigned max_depth = 32,
                     ExtractorStats* stats = nullptr);

// Comparator baseline: consecutive event-time differences sharing a middle
// event, dT1 > dT2 -> 0, dT1 < dT2 -> 1, ties skipped. Roughly one bit per
// two detections.
BitVector protocol_diff(const PhotonEventStream& ev);

// Parity baseline: one bit per fixed interval, the parity of the number of
// detections inside it. Bit rate is duration / interval regardless of the
// count rate; bias decays as exp(-2 * lambda * tau) / 2.
BitVector protocol_odeven(const PhotonEventStream& ev, uint64_t interval_ticks);

// Residual bias of the parity baseline toward zero for a Poisson source,
// as a function of lambda * tau (expected detections per interval).
double odeven_bias(double lambda_tau);

} // namespace spadrng
