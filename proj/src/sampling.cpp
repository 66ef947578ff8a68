#include "spadrng/sampling.hpp"

#include <cstdio>
#include <stdexcept>

namespace spadrng {

SampledBitStream sample_events(const PhotonEventStream& ev,
                               uint64_t sample_period_ticks,
                               uint64_t pulse_width_ticks) {
    if (sample_period_ticks == 0)
        throw std::invalid_argument("sample_events: sample_period_ticks must be >= 1");
    if (pulse_width_ticks == 0)
        throw std::invalid_argument("sample_events: pulse_width_ticks must be >= 1");

    SampledBitStream out;
    out.sample_period_ticks = sample_period_ticks;
    out.tick_s = ev.tick_s;
    const uint64_t n_bits = ev.tick_count / sample_period_ticks;
    out.bits = BitVector::zeros(n_bits);
    if (n_bits == 0) return out;

    // Work in clock-edge index space: edge j sits at tick j * period, and
    // edge j maps to output bit j - 1 (edge 0 has no predecessor). An event
    // at tick t holds the line high over edges ceil(t / period) ..
    // floor((t + pulse - 1) / period). A bit fires exactly at the first edge
    // of each maximal run of high edges, so it is enough to merge the
    // per-event edge intervals as they stream in.
    bool open = false;
    uint64_t run_hi = 0; // last high edge of the open run
    uint64_t masked = 0;
    for (uint64_t t : ev.t) {
        uint64_t a = (t + sample_period_ticks - 1) / sample_period_ticks;
        uint64_t b = (t + pulse_width_ticks - 1) / sample_period_ticks;
        if (a > b) continue;     // pulse fits between two edges, never seen
        if (b > n_bits) b = n_bits;
        if (a > n_bits) continue;
        if (open && a <= run_hi + 1) {
            if (b > run_hi) run_hi = b;
            ++masked;            // extends the current high run, no new edge
            continue;
        }
        if (a >= 1) out.bits.set(a - 1);
        open = true;
        run_hi = b;
    }
    if (masked > 0 && pulse_width_ticks >= sample_period_ticks)
        std::fprintf(stderr,
                     "sample_events: warning: pulse width (%llu ticks) >= sample period "
                     "(%llu ticks) left %llu events with no rising edge of their own\n",
                     static_cast<unsigned long long>(pulse_width_ticks),
                     static_cast<unsigned long long>(sample_period_ticks),
                     static_cast<unsigned long long>(masked));
    return out;
}

CoarseFineView split_coarse_fine(const std::vector<TagFrame>& frames,
                                 uint64_t frame_cycles) {
    if (frame_cycles == 0)
        throw std::invalid_argument("split_coarse_fine: frame_cycles must be >= 1");
    CoarseFineView view;
    view.frame_cycles = frame_cycles;
    view.n_frames = static_cast<uint32_t>(frames.size());
    if (frames.empty()) return view;

    const size_t n_pixels = frames[0].pixels.size();
    view.coarse.reserve(n_pixels);
    for (size_t p = 0; p < n_pixels; ++p)
        view.coarse.push_back(BitVector::zeros(frame_cycles * frames.size()));
    view.fine.resize(n_pixels);

    for (size_t fi = 0; fi < frames.size(); ++fi) {
        const TagFrame& f = frames[fi];
        if (f.pixels.size() != n_pixels)
            throw std::invalid_argument("split_coarse_fine: ragged frame (pixel count changed)");
        for (size_t p = 0; p < n_pixels; ++p) {
            uint32_t prev_cycle = 0;
            bool has_prev = false;
            for (const Tag& tag : f.pixels[p]) {
                if (tag.coarse >= frame_cycles)
                    throw std::invalid_argument("split_coarse_fine: coarse index beyond frame");
                if (has_prev && tag.coarse <= prev_cycle)
                    throw std::invalid_argument(
                        "split_coarse_fine: two tags in one cycle for one pixel");
                prev_cycle = tag.coarse;
                has_prev = true;
                view.coarse[p].set(fi * frame_cycles + tag.coarse);
                view.fine[p].push_back(tag.fine);
            }
        }
    }
    return view;
}

} // namespace spadrng
