#include <doctest.h>

#include <cmath>
#include <vector>

#include "spadrng/source_sim.hpp"

using namespace spadrng;

namespace {

SimConfig quick_cfg(double rate, double duration, uint64_t seed) {
    SimConfig c;
    c.photon_rate_hz = rate;
    c.duration_s = duration;
    c.tick_s = 10e-9;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("poisson arrivals have the right count and spacing") {
    SimConfig cfg = quick_cfg(200e3, 2.0, 42);
    PhotonEventStream ev = gen_poisson_arrivals(cfg);
    ev.validate();
    const double expect = cfg.photon_rate_hz * cfg.duration_s;
    CHECK(std::abs(static_cast<double>(ev.size()) - expect) < 4 * std::sqrt(expect));
    for (size_t i = 1; i < ev.t.size(); ++i) REQUIRE(ev.t[i] > ev.t[i - 1]);
    REQUIRE(ev.t.back() < ev.tick_count);
    for (EventKind k : ev.label) REQUIRE(k == EventKind::True);

    // Exact lattice discretization: P(gap > m) = exp(-rate * m * tick).
    uint64_t over = 0;
    for (size_t i = 1; i < ev.t.size(); ++i) over += (ev.t[i] - ev.t[i - 1]) > 500;
    const double p = std::exp(-cfg.rate_per_tick() * 500); // e^-1
    const double n = static_cast<double>(ev.size() - 1);
    CHECK(std::abs(over / n - p) < 5 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("poisson arrivals are reproducible and seed-sensitive") {
    SimConfig cfg = quick_cfg(50e3, 0.5, 7);
    PhotonEventStream a = gen_poisson_arrivals(cfg);
    PhotonEventStream b = gen_poisson_arrivals(cfg);
    CHECK(a.t == b.t);
    cfg.seed = 8;
    PhotonEventStream c = gen_poisson_arrivals(cfg);
    CHECK(a.t != c.t);
}

TEST_CASE("dead time enforces a minimum accepted gap") {
    SimConfig cfg = quick_cfg(2e6, 0.5, 11); // dense stream stresses rejection
    DetectorModel det;
    det.dead_time_ticks = 7;
    det.afterpulse_prob = 0.0;
    PhotonEventStream in = gen_poisson_arrivals(cfg);
    PhotonEventStream out = apply_detector(in, det, cfg.seed);
    out.validate();
    REQUIRE(out.size() > 0);
    CHECK(out.size() < in.size());
    uint64_t min_gap = UINT64_MAX;
    for (size_t i = 1; i < out.t.size(); ++i)
        min_gap = std::min(min_gap, out.t[i] - out.t[i - 1]);
    CHECK(min_gap >= det.dead_time_ticks);
    // A gap of exactly the dead time must be possible, not just allowed.
    CHECK(min_gap == det.dead_time_ticks);
}

TEST_CASE("detector with no non-idealities passes the stream through") {
    SimConfig cfg = quick_cfg(100e3, 1.0, 3);
    DetectorModel det;
    det.dead_time_ticks = 0;
    det.afterpulse_prob = 0.0;
    det.dark_rate_hz = 0.0;
    PhotonEventStream in = gen_poisson_arrivals(cfg);
    PhotonEventStream out = apply_detector(in, det, cfg.seed);
    CHECK(out.t == in.t);
}

TEST_CASE("afterpulses appear at the configured probability inside the window") {
    SimConfig cfg = quick_cfg(20e3, 5.0, 19); // sparse: cascades resolve cleanly
    DetectorModel det;
    det.dead_time_ticks = 3;
    det.afterpulse_prob = 0.2;
    det.afterpulse_window_ticks = 18;
    PhotonEventStream in = gen_poisson_arrivals(cfg);
    PhotonEventStream out = apply_detector(in, det, cfg.seed);
    uint64_t n_ap = 0;
    for (size_t i = 0; i < out.size(); ++i) {
        if (out.label[i] != EventKind::Afterpulse) continue;
        ++n_ap;
        REQUIRE(i > 0);
        const uint64_t off = out.t[i] - out.t[i - 1];
        // The parent is the previous accepted event unless something slipped
        // between; offsets land in (dead, window].
        CHECK(off >= det.dead_time_ticks);
        CHECK(off <= det.afterpulse_window_ticks);
    }
    const double frac = static_cast<double>(n_ap) / static_cast<double>(out.size());
    CHECK(frac == doctest::Approx(det.afterpulse_prob).epsilon(0.1));
}

TEST_CASE("dark counts arrive without photons and carry the photon label") {
    SimConfig cfg = quick_cfg(0.0, 2.0, 23);
    DetectorModel det;
    det.dark_rate_hz = 10e3;
    PhotonEventStream in = gen_poisson_arrivals(cfg);
    REQUIRE(in.size() == 0);
    PhotonEventStream out = apply_detector(in, det, cfg.seed);
    const double expect = det.dark_rate_hz * cfg.duration_s;
    CHECK(std::abs(static_cast<double>(out.size()) - expect) < 5 * std::sqrt(expect));
    for (EventKind k : out.label) CHECK(k == EventKind::True);
}

TEST_CASE("detector output is reproducible") {
    SimConfig cfg = quick_cfg(300e3, 1.0, 31);
    DetectorModel det;
    det.dead_time_ticks = 3;
    det.afterpulse_prob = 0.112;
    det.afterpulse_window_ticks = 18;
    det.dark_rate_hz = 200.0;
    PhotonEventStream in = gen_poisson_arrivals(cfg);
    PhotonEventStream a = apply_detector(in, det, cfg.seed);
    PhotonEventStream b = apply_detector(in, det, cfg.seed);
    CHECK(a.t == b.t);
    CHECK(a.label == b.label);
}

TEST_CASE("config validation rejects nonsense") {
    SimConfig cfg;
    cfg.photon_rate_hz = -1.0;
    CHECK_THROWS(cfg.validate());
    cfg = SimConfig{};
    cfg.tick_s = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = SimConfig{};
    cfg.photon_rate_hz = 2e8; // more than one expected event per tick
    CHECK_THROWS(cfg.validate());
    DetectorModel det;
    det.pulse_width_ticks = 0;
    CHECK_THROWS(det.validate());
    det = DetectorModel{};
    det.afterpulse_prob = 0.5;
    det.afterpulse_window_ticks = det.dead_time_ticks; // window must clear dead time
    CHECK_THROWS(det.validate());
}

TEST_CASE("tdc profile entropy and missing codes") {
    TdcProfile u = TdcProfile::uniform(8);
    CHECK(u.entropy_bits() == doctest::Approx(3.0));
    CHECK(u.missing_codes().empty());

    TdcProfile lin = TdcProfile::linospad_default();
    CHECK(lin.alphabet() == 140);
    CHECK(lin.missing_codes().size() == 10);
    CHECK(lin.entropy_bits() == doctest::Approx(6.8153).epsilon(1e-3));

    TdcProfile bad;
    bad.bin_weights = {1.0, -2.0};
    CHECK_THROWS(bad.validate());
}

namespace {

ArrayConfig tiny_array(uint32_t n_tdc, double rate, uint32_t frames) {
    ArrayConfig a;
    a.n_pixels = 4 * n_tdc;
    a.n_tdc = n_tdc;
    a.frame_time_s = 320e-6;
    a.n_frames = frames;
    a.buffer_cap = 512;
    a.tick_s = 2.5e-9 / 140.0;
    a.cycle_ticks = 140;
    a.pixel_rate_hz.assign(n_tdc, rate);
    a.tdc = TdcProfile::uniform(140);
    a.detector.dead_time_ticks = 2240;
    a.detector.pulse_width_ticks = 1;
    a.detector.afterpulse_prob = 0.0;
    a.detector.afterpulse_window_ticks = 11200;
    a.detector.dark_rate_hz = 0.0;
    return a;
}

} // namespace

TEST_CASE("array tags stay inside frame and alphabet bounds") {
    ArrayConfig a = tiny_array(8, 400e3, 50);
    a.detector.afterpulse_prob = 0.2;
    ArrayResult res = simulate_array(a, 5);
    REQUIRE(res.frames.size() == 50);
    uint64_t tags = 0;
    for (const TagFrame& f : res.frames) {
        REQUIRE(f.pixels.size() == a.n_tdc);
        for (const std::vector<Tag>& v : f.pixels) {
            tags += v.size();
            for (size_t i = 0; i < v.size(); ++i) {
                REQUIRE(v[i].coarse < a.frame_cycles());
                REQUIRE(v[i].fine < a.tdc.alphabet());
                if (i) REQUIRE(v[i].coarse > v[i - 1].coarse);
            }
        }
    }
    // Afterpulses cascade, multiplying accepted counts by ~1/(1 - p); the
    // shortfall against that bound is window truncation and dead time.
    const double expect_per_pixel = a.pixel_rate_hz[0] * a.frame_time_s *
                                    a.n_frames /
                                    (1.0 - a.detector.afterpulse_prob);
    CHECK(static_cast<double>(tags) ==
          doctest::Approx(expect_per_pixel * a.n_tdc).epsilon(0.05));
    // Truth bookkeeping covers every tag.
    uint64_t truth = 0;
    for (uint32_t p = 0; p < a.n_tdc; ++p)
        truth += res.true_counts[p] + res.afterpulse_counts[p] + res.crosstalk_counts[p];
    CHECK(truth == tags);
}

TEST_CASE("array runs are reproducible") {
    ArrayConfig a = tiny_array(4, 500e3, 20);
    a.detector.afterpulse_prob = 0.3;
    a.crosstalk.push_back({0, 2, 0.1});
    ArrayResult r1 = simulate_array(a, 9);
    ArrayResult r2 = simulate_array(a, 9);
    REQUIRE(r1.frames.size() == r2.frames.size());
    for (size_t f = 0; f < r1.frames.size(); ++f)
        for (uint32_t p = 0; p < a.n_tdc; ++p) {
            REQUIRE(r1.frames[f].pixels[p].size() == r2.frames[f].pixels[p].size());
            for (size_t i = 0; i < r1.frames[f].pixels[p].size(); ++i) {
                CHECK(r1.frames[f].pixels[p][i].coarse == r2.frames[f].pixels[p][i].coarse);
                CHECK(r1.frames[f].pixels[p][i].fine == r2.frames[f].pixels[p][i].fine);
            }
        }
}

TEST_CASE("buffer cap truncates and flags the frame") {
    ArrayConfig a = tiny_array(2, 2e6, 30);
    a.buffer_cap = 100; // ~640 detections per frame at this rate
    ArrayResult res = simulate_array(a, 13);
    bool any_saturated = false;
    for (const TagFrame& f : res.frames)
        for (uint32_t p = 0; p < a.n_tdc; ++p) {
            REQUIRE(f.pixels[p].size() <= a.buffer_cap);
            if (f.saturated[p]) {
                any_saturated = true;
                CHECK(f.pixels[p].size() == a.buffer_cap);
            }
        }
    CHECK(any_saturated);
}

TEST_CASE("crosstalk injects correlated counts into the target") {
    ArrayConfig a = tiny_array(3, 300e3, 100);
    a.pixel_rate_hz[1] = 0.0; // target is otherwise silent
    a.crosstalk.push_back({0, 1, 0.25});
    ArrayResult res = simulate_array(a, 17);
    uint64_t src = 0, tgt = 0;
    for (const TagFrame& f : res.frames) {
        src += f.pixels[0].size();
        tgt += f.pixels[1].size();
    }
    REQUIRE(src > 0);
    CHECK(res.crosstalk_counts[1] == tgt);
    CHECK(static_cast<double>(tgt) ==
          doctest::Approx(0.25 * static_cast<double>(src)).epsilon(0.1));
    // Pixel 2 has no incoming link and stays uncorrelated.
    CHECK(res.crosstalk_counts[2] == 0);
}

TEST_CASE("array config validation") {
    ArrayConfig a = tiny_array(4, 100e3, 10);
    a.n_tdc = 3; // does not divide n_pixels
    CHECK_THROWS(a.validate());
    a = tiny_array(4, 100e3, 10);
    a.crosstalk.push_back({2, 1, 0.1}); // source must be below target
    CHECK_THROWS(a.validate());
    a = tiny_array(4, 100e3, 10);
    a.frame_time_s = 1.0; // frame tick count too large for the tag format
    CHECK_THROWS(a.validate());
    a = tiny_array(4, 100e3, 10);
    a.pixel_rate_hz.resize(2);
    CHECK_THROWS(a.validate());
}

TEST_CASE("hot pixel stays under the buffer by design margin") {
    // Direct Poisson tail sum: the hottest preset pixel averages ~360 tags
    // per frame against a 512 deep buffer.
    const double lambda = 360.0;
    double log_term = -lambda; // log P(0)
    double tail = 1.0;
    for (int k = 1; k <= 512; ++k) {
        log_term += std::log(lambda / k);
        tail -= std::exp(log_term);
        if (k < 512) continue;
    }
    // Accumulated P(X <= 512) subtracted from 1; the remainder is the
    // saturation probability per pixel frame.
    CHECK(tail < 1e-6);
    CHECK(tail > 0.0 - 1e-12);
}
