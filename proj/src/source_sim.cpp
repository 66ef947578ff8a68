#include "spadrng/source_sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace spadrng {

uint64_t SimConfig::duration_ticks() const {
    return static_cast<uint64_t>(std::llround(duration_s / tick_s));
}

void SimConfig::validate() const {
    if (!(photon_rate_hz >= 0.0) || !std::isfinite(photon_rate_hz))
        throw std::invalid_argument("SimConfig: photon_rate_hz must be finite and >= 0");
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s))
        throw std::invalid_argument("SimConfig: duration_s must be finite and >= 0");
    if (!(tick_s > 0.0) || !std::isfinite(tick_s))
        throw std::invalid_argument("SimConfig: tick_s must be positive");
    if (photon_rate_hz * tick_s >= 1.0)
        throw std::invalid_argument("SimConfig: more than one photon per tick on average");
}

void PhotonEventStream::validate() const {
    if (t.size() != label.size())
        throw std::invalid_argument("PhotonEventStream: label/time size mismatch");
    for (size_t i = 0; i < t.size(); ++i) {
        if (i > 0 && t[i] <= t[i - 1])
            throw std::invalid_argument("PhotonEventStream: ticks not strictly increasing");
        if (t[i] >= tick_count)
            throw std::invalid_argument("PhotonEventStream: event beyond stream duration");
    }
}

void DetectorModel::validate() const {
    if (pulse_width_ticks < 1)
        throw std::invalid_argument("DetectorModel: pulse_width_ticks must be >= 1");
    if (!(afterpulse_prob >= 0.0) || afterpulse_prob >= 1.0)
        throw std::invalid_argument("DetectorModel: afterpulse_prob must be in [0, 1)");
    if (afterpulse_prob > 0.0 && afterpulse_window_ticks <= dead_time_ticks)
        throw std::invalid_argument(
            "DetectorModel: afterpulse_window_ticks must exceed dead_time_ticks");
    if (!(dark_rate_hz >= 0.0) || !std::isfinite(dark_rate_hz))
        throw std::invalid_argument("DetectorModel: dark_rate_hz must be finite and >= 0");
}

PhotonEventStream gen_poisson_arrivals(const SimConfig& cfg) {
    cfg.validate();
    PhotonEventStream out;
    out.tick_s = cfg.tick_s;
    out.tick_count = cfg.duration_ticks();
    double rate = cfg.rate_per_tick();
    if (rate <= 0.0 || out.tick_count == 0) return out;

    out.t.reserve(static_cast<size_t>(rate * static_cast<double>(out.tick_count) * 1.01) + 16);
    Rng rng(derive_stream_seed(cfg.seed, 0, StreamKind::Photon));
    // First gap is measured from tick -1 so that tick 0 is reachable.
    uint64_t t = rng.exp_gap_ticks(rate) - 1;
    while (t < out.tick_count) {
        out.t.push_back(t);
        uint64_t gap = rng.exp_gap_ticks(rate);
        if (out.tick_count - t <= gap) break;
        t += gap;
    }
    out.label.assign(out.t.size(), EventKind::True);
    return out;
}

namespace {

struct PendingEvent {
    uint64_t t;
    EventKind kind;
    // Heap pops the earliest tick; ties resolve to the earlier insertion so
    // the result does not depend on heap internals.
    uint64_t seq;
    bool operator>(const PendingEvent& o) const {
        return t != o.t ? t > o.t : seq > o.seq;
    }
};

} // namespace

PhotonEventStream apply_detector(const PhotonEventStream& in,
                                 const DetectorModel& det, uint64_t seed) {
    det.validate();
    PhotonEventStream out;
    out.tick_s = in.tick_s;
    out.tick_count = in.tick_count;
    out.t.reserve(in.t.size());

    // Dark counts: an independent Poisson stream over the same span, merged
    // before filtering. Generated up front so draw order is fixed.
    std::vector<uint64_t> dark;
    double dark_rate = det.dark_rate_hz * in.tick_s;
    if (dark_rate > 0.0 && in.tick_count > 0) {
        Rng rng(derive_stream_seed(seed, 0, StreamKind::Dark));
        uint64_t t = rng.exp_gap_ticks(dark_rate) - 1;
        while (t < in.tick_count) {
            dark.push_back(t);
            uint64_t gap = rng.exp_gap_ticks(dark_rate);
            if (in.tick_count - t <= gap) break;
            t += gap;
        }
    }

    Rng ap_rng(derive_stream_seed(seed, 0, StreamKind::Afterpulse));
    std::priority_queue<PendingEvent, std::vector<PendingEvent>, std::greater<>> pending;
    uint64_t seq = 0;

    size_t ii = 0, di = 0;
    bool have_last = false;
    uint64_t last = 0;

    auto accept = [&](uint64_t t, EventKind kind) {
        if (have_last && (t <= last || t - last < det.dead_time_ticks)) return;
        out.t.push_back(t);
        out.label.push_back(kind);
        last = t;
        have_last = true;
        if (det.afterpulse_prob > 0.0 && ap_rng.bernoulli(det.afterpulse_prob)) {
            uint64_t off = ap_rng.uniform_int(det.dead_time_ticks + 1,
                                              det.afterpulse_window_ticks);
            if (in.tick_count - t > off)
                pending.push({t + off, EventKind::Afterpulse, seq++});
        }
    };

    // Three-way merge in time order: input events, dark counts, and the
    // dynamically generated afterpulses.
    while (ii < in.t.size() || di < dark.size() || !pending.empty()) {
        uint64_t tp = !pending.empty() ? pending.top().t : UINT64_MAX;
        uint64_t tin = ii < in.t.size() ? in.t[ii] : UINT64_MAX;
        uint64_t td = di < dark.size() ? dark[di] : UINT64_MAX;
        if (tp <= tin && tp <= td) {
            PendingEvent e = pending.top();
            pending.pop();
            accept(e.t, e.kind);
        } else if (tin <= td) {
            accept(tin, in.label.empty() ? EventKind::True : in.label[ii]);
            ++ii;
        } else {
            accept(td, EventKind::True);
            ++di;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

double TdcProfile::entropy_bits() const {
    double total = 0.0;
    for (double w : bin_weights) total += w;
    double h = 0.0;
    for (double w : bin_weights) {
        if (w > 0.0) {
            double p = w / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

std::vector<unsigned> TdcProfile::missing_codes() const {
    std::vector<unsigned> m;
    for (unsigned i = 0; i < bin_weights.size(); ++i)
        if (bin_weights[i] == 0.0) m.push_back(i);
    return m;
}

void TdcProfile::validate() const {
    if (bin_weights.empty() || bin_weights.size() > 256)
        throw std::invalid_argument("TdcProfile: alphabet must be in [1, 256]");
    double total = 0.0;
    for (double w : bin_weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("TdcProfile: weights must be finite and >= 0");
        total += w;
    }
    if (total <= 0.0)
        throw std::invalid_argument("TdcProfile: all weights are zero");
}

TdcProfile TdcProfile::uniform(unsigned alphabet) {
    TdcProfile p;
    p.bin_weights.assign(alphabet, 1.0);
    return p;
}

TdcProfile TdcProfile::linospad_default() {
    TdcProfile p;
    p.bin_weights.assign(140, 1.0);
    // Codes below 10 never fire; every fourth code catches a triple share of
    // the carry chain. Shannon entropy of the result is ~6.815 bits.
    for (unsigned i = 0; i < 10; ++i) p.bin_weights[i] = 0.0;
    for (unsigned i = 10; i < 140; ++i)
        if (i % 4 == 0) p.bin_weights[i] = 3.0;
    return p;
}

uint64_t ArrayConfig::frame_ticks() const {
    return static_cast<uint64_t>(std::llround(frame_time_s / tick_s));
}

void ArrayConfig::validate() const {
    if (n_tdc == 0 || n_pixels == 0 || n_pixels % n_tdc != 0)
        throw std::invalid_argument("ArrayConfig: n_tdc must divide n_pixels");
    if (!(tick_s > 0.0) || cycle_ticks == 0)
        throw std::invalid_argument("ArrayConfig: bad tick/cycle configuration");
    if (frame_ticks() == 0 || frame_ticks() % cycle_ticks != 0)
        throw std::invalid_argument("ArrayConfig: frame_time_s must be a whole number of cycles");
    // The interval counter is 28 bits wide; a frame longer than 2^28 ticks
    // (~4.8 ms at the default resolution) cannot be represented.
    if (frame_ticks() > (uint64_t{1} << 28))
        throw std::invalid_argument("ArrayConfig: frame_time_s exceeds the 2^28-tick counter range");
    if (buffer_cap == 0)
        throw std::invalid_argument("ArrayConfig: buffer_cap must be >= 1");
    if (pixel_rate_hz.size() != n_tdc)
        throw std::invalid_argument("ArrayConfig: pixel_rate_hz must have one entry per live pixel");
    for (double r : pixel_rate_hz)
        if (!(r >= 0.0) || r * tick_s >= 1.0)
            throw std::invalid_argument("ArrayConfig: pixel rate out of range");
    for (const CrosstalkLink& l : crosstalk) {
        if (l.source >= l.target)
            throw std::invalid_argument("ArrayConfig: crosstalk links must have source < target");
        if (l.target >= n_tdc)
            throw std::invalid_argument("ArrayConfig: crosstalk link beyond live pixels");
        if (!(l.prob >= 0.0) || l.prob >= 1.0)
            throw std::invalid_argument("ArrayConfig: crosstalk prob must be in [0, 1)");
    }
    tdc.validate();
    detector.validate();
}

ArrayResult simulate_array(const ArrayConfig& cfg, uint64_t seed) {
    cfg.validate();
    const uint64_t frame_ticks = cfg.frame_ticks();
    const uint64_t total_ticks = frame_ticks * cfg.n_frames;
    const uint64_t frame_cycles = cfg.frame_cycles();

    ArrayResult res;
    res.frames.resize(cfg.n_frames);
    for (TagFrame& f : res.frames) {
        f.pixels.resize(cfg.n_tdc);
        f.saturated.assign(cfg.n_tdc, 0);
    }
    res.true_counts.assign(cfg.n_tdc, 0);
    res.afterpulse_counts.assign(cfg.n_tdc, 0);
    res.crosstalk_counts.assign(cfg.n_tdc, 0);

    // Injections accumulated for each target pixel; links have source <
    // target, so by the time a pixel is processed its inbox is complete.
    std::vector<std::vector<uint64_t>> inbox(cfg.n_tdc);

    DiscreteSampler tdc_sampler(cfg.tdc.bin_weights);

    for (uint32_t pix = 0; pix < cfg.n_tdc; ++pix) {
        SimConfig scfg;
        scfg.photon_rate_hz = cfg.pixel_rate_hz[pix];
        scfg.duration_s = static_cast<double>(total_ticks) * cfg.tick_s;
        scfg.tick_s = cfg.tick_s;
        scfg.seed = derive_stream_seed(seed, pix, StreamKind::Photon);

        PhotonEventStream arrivals;
        arrivals.tick_s = cfg.tick_s;
        arrivals.tick_count = total_ticks;
        if (scfg.photon_rate_hz > 0.0) {
            double rate = scfg.rate_per_tick();
            Rng rng(scfg.seed);
            uint64_t t = rng.exp_gap_ticks(rate) - 1;
            while (t < total_ticks) {
                arrivals.t.push_back(t);
                uint64_t gap = rng.exp_gap_ticks(rate);
                if (total_ticks - t <= gap) break;
                t += gap;
            }
        }
        arrivals.label.assign(arrivals.t.size(), EventKind::True);

        // Merge crosstalk injections from lower-index pixels.
        if (!inbox[pix].empty()) {
            std::vector<uint64_t>& inj = inbox[pix];
            std::sort(inj.begin(), inj.end());
            PhotonEventStream merged;
            merged.tick_s = cfg.tick_s;
            merged.tick_count = total_ticks;
            merged.t.reserve(arrivals.t.size() + inj.size());
            merged.label.reserve(arrivals.t.size() + inj.size());
            size_t a = 0, b = 0;
            while (a < arrivals.t.size() || b < inj.size()) {
                bool take_inj = b < inj.size() &&
                                (a >= arrivals.t.size() || inj[b] < arrivals.t[a]);
                if (take_inj) {
                    merged.t.push_back(inj[b]);
                    merged.label.push_back(EventKind::Crosstalk);
                    ++b;
                } else {
                    merged.t.push_back(arrivals.t[a]);
                    merged.label.push_back(EventKind::True);
                    ++a;
                }
            }
            // Two arrivals on the same tick cannot both avalanche; keep the
            // first (the photon, when both are present).
            size_t w = 0;
            for (size_t r = 0; r < merged.t.size(); ++r) {
                if (w > 0 && merged.t[r] == merged.t[w - 1]) continue;
                merged.t[w] = merged.t[r];
                merged.label[w] = merged.label[r];
                ++w;
            }
            merged.t.resize(w);
            merged.label.resize(w);
            arrivals = std::move(merged);
            std::vector<uint64_t>().swap(inbox[pix]);
        }

        PhotonEventStream accepted =
            apply_detector(arrivals, cfg.detector, derive_stream_seed(seed, pix, StreamKind::Dark));

        // Outgoing crosstalk: each accepted avalanche fires into each linked
        // target with the link probability, at the same tick.
        Rng ct_rng(derive_stream_seed(seed, pix, StreamKind::Crosstalk));
        for (const CrosstalkLink& l : cfg.crosstalk) {
            if (l.source != pix || l.prob <= 0.0) continue;
            for (uint64_t t : accepted.t)
                if (ct_rng.bernoulli(l.prob)) inbox[l.target].push_back(t);
        }

        // Tag the accepted events frame by frame.
        Rng tdc_rng(derive_stream_seed(seed, pix, StreamKind::Tdc));
        for (size_t i = 0; i < accepted.t.size(); ++i) {
            uint64_t t = accepted.t[i];
            uint64_t frame = t / frame_ticks;
            uint32_t cycle = static_cast<uint32_t>((t % frame_ticks) / cfg.cycle_ticks);
            uint8_t fine = static_cast<uint8_t>(tdc_sampler.sample(tdc_rng));
            TagFrame& f = res.frames[frame];
            if (f.pixels[pix].size() >= cfg.buffer_cap) {
                f.saturated[pix] = 1; // buffer full, tag dropped
                continue;
            }
            f.pixels[pix].push_back(Tag{cycle, fine});
            switch (accepted.label[i]) {
                case EventKind::True: ++res.true_counts[pix]; break;
                case EventKind::Afterpulse: ++res.afterpulse_counts[pix]; break;
                case EventKind::Crosstalk: ++res.crosstalk_counts[pix]; break;
            }
        }
        (void)frame_cycles;
    }
    return res;
}

} // namespace spadrng
