#include "spadrng/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace spadrng {

using nlohmann::json;

const char* extractor_name(ExtractorKind k) {
    switch (k) {
        case ExtractorKind::VonNeumann: return "von-neumann";
        case ExtractorKind::Peres: return "peres";
        case ExtractorKind::ZhouBruck: return "zhou-bruck";
        case ExtractorKind::Diff: return "diff";
        case ExtractorKind::OdEven: return "odeven";
    }
    return "?";
}

ExtractorKind extractor_from_name(const std::string& name) {
    if (name == "von-neumann" || name == "vn") return ExtractorKind::VonNeumann;
    if (name == "peres") return ExtractorKind::Peres;
    if (name == "zhou-bruck" || name == "zb") return ExtractorKind::ZhouBruck;
    if (name == "diff") return ExtractorKind::Diff;
    if (name == "odeven") return ExtractorKind::OdEven;
    throw std::invalid_argument("unknown extractor: " + name);
}

void PipelineConfig::validate() const {
    if (mode != "randy" && mode != "linospad")
        throw std::invalid_argument("mode must be randy or linospad");
    if (sample_period_ticks == 0)
        throw std::invalid_argument("sample_period_ticks must be positive");
    if (odeven_interval_ticks == 0)
        throw std::invalid_argument("odeven_interval_ticks must be positive");
    if (max_depth == 0)
        throw std::invalid_argument("max_depth must be at least 1");
    if (mode == "randy") {
        sim.validate();
        detector.validate();
    } else {
        array.validate();
    }
    if (!conditioning.auto_guard && conditioning.guard == 0)
        throw std::invalid_argument("fixed guard must be positive");
    if (!(conditioning.band_lo > 0.0 && conditioning.band_lo < 1.0 &&
          conditioning.band_hi > 1.0))
        throw std::invalid_argument("cutoff bands must bracket 1");
}

PipelineConfig randy_preset() {
    PipelineConfig cfg;
    cfg.mode = "randy";
    cfg.seed = 71;
    cfg.extractor = ExtractorKind::Peres;
    cfg.max_depth = 32;
    cfg.sample_period_ticks = 1;
    cfg.odeven_interval_ticks = 5000; // 50 us at the 10 ns tick

    cfg.sim.photon_rate_hz = 178.7e3; // lands at ~200 kcps detected
    cfg.sim.duration_s = 10.0;
    cfg.sim.tick_s = 10e-9;

    cfg.detector.dead_time_ticks = 3; // 30 ns recovery
    cfg.detector.pulse_width_ticks = 1;
    cfg.detector.afterpulse_prob = 0.112;
    cfg.detector.afterpulse_window_ticks = 18; // 180 ns trap release
    cfg.detector.dark_rate_hz = 200.0;
    return cfg;
}

PipelineConfig linospad_preset() {
    PipelineConfig cfg;
    cfg.mode = "linospad";
    cfg.seed = 11;
    cfg.extractor = ExtractorKind::ZhouBruck;
    cfg.max_depth = 32;

    ArrayConfig& a = cfg.array;
    a.n_pixels = 256;
    a.n_tdc = 64;
    a.frame_time_s = 320e-6;
    a.n_frames = 8000;
    a.buffer_cap = 512;
    a.tick_s = 2.5e-9 / 140.0;
    a.cycle_ticks = 140;
    a.tdc = TdcProfile::linospad_default();

    a.detector.dead_time_ticks = 2240;       // 40 ns
    a.detector.pulse_width_ticks = 1;
    a.detector.afterpulse_prob = 0.30;
    a.detector.afterpulse_window_ticks = 11200; // 200 ns
    a.detector.dark_rate_hz = 500.0;

    // The fiber spot covers the whole bank with a mild falloff toward the
    // high end.  A few pixels run hot.
    a.pixel_rate_hz.resize(a.n_tdc);
    const double base = 395e3;
    for (uint32_t i = 0; i < a.n_tdc; ++i)
        a.pixel_rate_hz[i] = base * (1.0 - 0.12 * static_cast<double>(i) / 63.0);
    for (uint32_t hot : {5u, 21u, 34u, 49u}) a.pixel_rate_hz[hot] = 600e3;

    // A microlens array with a pitch of four pixels sits over the lower 56
    // channels, and avalanches couple optically between pixels that share a
    // lens.  The last eight channels are past the array and stay clean.
    for (uint32_t c = 0; c < 14; ++c) {
        const uint32_t p0 = 4 * c;
        for (uint32_t i = 0; i < 4; ++i)
            for (uint32_t j = i + 1; j < 4; ++j)
                cfg.array.crosstalk.push_back({p0 + i, p0 + j, 0.05});
    }

    cfg.conditioning.cull_threshold = 0.02;
    cfg.conditioning.cull_window_cycles = 2;
    cfg.conditioning.cull_neighborhood = 3;
    return cfg;
}

RandyResult run_randy(const PipelineConfig& cfg, const PhotonEventStream* pre_detected) {
    const auto t_start = std::chrono::steady_clock::now();
    cfg.validate();
    if (cfg.mode != "randy")
        throw std::invalid_argument("run_randy: config mode is not randy");
    SimConfig sim = cfg.sim;
    sim.seed = cfg.seed;

    RandyResult r;
    PhotonEventStream detected;
    if (pre_detected) {
        detected = *pre_detected;
        // Files carry no capture duration; the config is authoritative so a
        // replay from disk matches the in-memory run sample for sample.
        detected.tick_count = sim.duration_ticks();
        if (detected.tick_s == 0.0) detected.tick_s = sim.tick_s;
        if (!detected.t.empty() && detected.t.back() >= detected.tick_count)
            throw std::invalid_argument(
                "run_randy: recorded events extend past the configured duration");
    } else {
        PhotonEventStream arrivals = gen_poisson_arrivals(sim);
        detected = apply_detector(arrivals, cfg.detector, sim.seed);
    }
    const double duration_s =
        static_cast<double>(detected.tick_count) * detected.tick_s;
    r.n_detected = detected.size();
    r.detected_rate_hz =
        duration_s > 0.0 ? static_cast<double>(r.n_detected) / duration_s : 0.0;

    if (cfg.extractor == ExtractorKind::Diff || cfg.extractor == ExtractorKind::OdEven) {
        // The comparator baselines work on event times directly; there is no
        // sampled stream to condition.
        if (cfg.extractor == ExtractorKind::Diff) {
            r.bits = protocol_diff(detected);
            r.expected_rate_bits_s = r.detected_rate_hz / 2.0;
        } else {
            r.bits = protocol_odeven(detected, cfg.odeven_interval_ticks);
            r.expected_rate_bits_s =
                1.0 / (static_cast<double>(cfg.odeven_interval_ticks) * detected.tick_s);
        }
        r.extractor_stats.n_in = r.n_detected;
        r.extractor_stats.n_out = r.bits.size();
    } else {
        SampledBitStream sampled = sample_events(detected, cfg.sample_period_ticks,
                                                 cfg.detector.pulse_width_ticks);
        detected.t.clear();
        detected.t.shrink_to_fit();
        detected.label.clear();
        detected.label.shrink_to_fit();

        r.histogram = interarrival_histogram(sampled.bits);
        r.guard = cfg.conditioning.auto_guard
                      ? estimate_cutoff(r.histogram, cfg.conditioning.band_lo,
                                        cfg.conditioning.band_hi)
                      : cfg.conditioning.guard;
        GuardRemovalResult cond = remove_guard(sampled.bits, r.guard);
        sampled.bits.release();
        r.conditioning = cond.report;
        r.survivor_rate_hz =
            duration_s > 0.0 ? static_cast<double>(cond.report.ones_out) / duration_s : 0.0;
        r.loss_fraction = cond.report.events_lost_frac();
        const double sample_rate_hz =
            1.0 / (static_cast<double>(cfg.sample_period_ticks) * detected.tick_s);
        r.effective_sample_hz = cond.report.equivalent_rate_hz(sample_rate_hz);
        r.p1 = cond.report.n_out
                   ? static_cast<double>(cond.report.ones_out) /
                         static_cast<double>(cond.report.n_out)
                   : 0.0;
        r.expected_rate_bits_s = r.effective_sample_hz * binary_entropy(r.p1);

        InterarrivalHistogram hc = interarrival_histogram(cond.bits);
        if (hc.n_gaps > 0) {
            r.ks_statistic = hc.ks_distance(hc.floor_gap);
            r.ks_critical = ks_critical_1pct(hc.n_gaps);
            r.ks_pass = r.ks_statistic < r.ks_critical;
        }

        ExtractorStats st;
        r.bits = cfg.extractor == ExtractorKind::VonNeumann
                     ? von_neumann(cond.bits, &st)
                     : peres(cond.bits, cfg.max_depth, &st);
        r.extractor_stats = st;
    }

    r.bits_per_second =
        duration_s > 0.0 ? static_cast<double>(r.bits.size()) / duration_s : 0.0;
    r.report = analyze_bits(r.bits, 100);
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return r;
}

namespace {

template <class F>
void parallel_over_pixels(uint32_t n, unsigned threads, F&& work) {
    unsigned n_threads = threads ? threads : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, n ? n : 1);
    if (n_threads <= 1) {
        for (uint32_t p = 0; p < n; ++p) work(p);
        return;
    }
    std::atomic<uint32_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const uint32_t p = next.fetch_add(1);
                if (p >= n) break;
                work(p);
            }
        });
    }
    for (std::thread& th : pool) th.join();
}

} // namespace

LinospadResult run_linospad(const PipelineConfig& cfg,
                            const std::vector<TagFrame>* pre_recorded) {
    const auto t_start = std::chrono::steady_clock::now();
    cfg.validate();
    if (cfg.mode != "linospad")
        throw std::invalid_argument("run_linospad: config mode is not linospad");
    const ArrayConfig& a = cfg.array;

    LinospadResult r;
    ArrayResult sim;
    const std::vector<TagFrame>* frames = pre_recorded;
    if (!frames) {
        sim = simulate_array(a, cfg.seed);
        frames = &sim.frames;
    }
    r.n_frames = frames->size();
    r.live_time_s = static_cast<double>(r.n_frames) * a.frame_time_s;
    const double live = r.live_time_s;

    CoarseFineView view = split_coarse_fine(*frames, a.frame_cycles());
    const uint32_t n = static_cast<uint32_t>(view.coarse.size());

    // Guard estimation sums per-pixel histograms: pixels see different
    // rates, so each is scored against its own tail fit while the combined
    // counts keep enough mass even in short captures. Gaps are within-pixel.
    {
        std::vector<InterarrivalHistogram> per_pixel(n);
        std::vector<uint64_t> pooled;
        for (uint32_t p = 0; p < n; ++p) {
            std::vector<uint64_t> pos = view.coarse[p].one_positions();
            std::vector<uint64_t> gaps;
            gaps.reserve(pos.size() > 0 ? pos.size() - 1 : 0);
            for (size_t i = 1; i < pos.size(); ++i)
                gaps.push_back(pos[i] - pos[i - 1]);
            per_pixel[p] = histogram_from_gaps(gaps);
            pooled.insert(pooled.end(), gaps.begin(), gaps.end());
        }
        r.pooled_histogram = histogram_from_gaps(pooled);
        r.guard_cycles = cfg.conditioning.auto_guard
                             ? estimate_cutoff_pooled(per_pixel, cfg.conditioning.band_lo,
                                                      cfg.conditioning.band_hi)
                             : cfg.conditioning.guard;
    }

    r.cull = cull_pixels(view, cfg.conditioning.cull_window_cycles,
                         cfg.conditioning.cull_threshold,
                         cfg.conditioning.cull_neighborhood);
    std::vector<bool> kept(n, false);
    for (uint32_t p : r.cull.kept) kept[p] = true;

    r.tdc_entropy_bits = a.tdc.entropy_bits();

    std::vector<PixelOutcome> outcomes(n);
    std::vector<BitVector> coarse_out(n), fine_out(n);
    parallel_over_pixels(n, cfg.threads, [&](uint32_t p) {
        PixelOutcome o;
        o.pixel = p;
        o.kept = kept[p];
        o.n_tags = view.fine[p].size();
        if (o.kept) {
            GuardRemovalResult g = remove_guard(view.coarse[p], r.guard_cycles);
            coarse_out[p] = peres(g.bits, cfg.max_depth, &o.coarse_stats);
            o.coarse_bits = coarse_out[p].size();
            o.coarse_bits_s = live > 0.0 ? static_cast<double>(o.coarse_bits) / live : 0.0;
        }
        // Fine codes survive culling: crosstalk copies arrival times, not
        // converter noise, so every pixel's code stream stays usable.
        SymbolStream ss;
        ss.alphabet = a.tdc.alphabet();
        ss.symbols.assign(view.fine[p].begin(), view.fine[p].end());
        fine_out[p] = zhou_bruck(ss, cfg.max_depth, &o.fine_stats);
        o.fine_bits = fine_out[p].size();
        o.fine_bits_s = live > 0.0 ? static_cast<double>(o.fine_bits) / live : 0.0;
        if (o.n_tags > 0 && r.tdc_entropy_bits > 0.0)
            o.fine_efficiency =
                extraction_efficiency(o.fine_bits, o.n_tags, r.tdc_entropy_bits);
        outcomes[p] = std::move(o);
    });

    std::vector<PixelRate> rates;
    rates.reserve(n);
    for (uint32_t p = 0; p < n; ++p) {
        const PixelOutcome& o = outcomes[p];
        r.total_tags += o.n_tags;
        rates.push_back({p, o.coarse_bits_s, o.fine_bits_s, o.kept});
        if (o.kept) r.coarse_bits.append(coarse_out[p]);
        coarse_out[p].release();
    }
    for (uint32_t p = 0; p < n; ++p) {
        r.fine_bits.append(fine_out[p]);
        fine_out[p].release();
    }
    r.pixels = std::move(outcomes);
    r.rates = aggregate_rates(rates);
    r.mean_tag_rate_hz =
        live > 0.0 && n > 0 ? static_cast<double>(r.total_tags) / live / n : 0.0;
    r.coarse_report = analyze_bits(r.coarse_bits, 100);
    r.fine_report = analyze_bits(r.fine_bits, 100);
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return r;
}

// --------------------------------------------------------------------------
// JSON round-trip.

namespace {

json detector_to_json(const DetectorModel& d) {
    return json{{"dead_time_ticks", d.dead_time_ticks},
                {"pulse_width_ticks", d.pulse_width_ticks},
                {"afterpulse_prob", d.afterpulse_prob},
                {"afterpulse_window_ticks", d.afterpulse_window_ticks},
                {"dark_rate_hz", d.dark_rate_hz}};
}

void detector_from_json(const json& j, DetectorModel& d) {
    d.dead_time_ticks = j.value("dead_time_ticks", d.dead_time_ticks);
    d.pulse_width_ticks = j.value("pulse_width_ticks", d.pulse_width_ticks);
    d.afterpulse_prob = j.value("afterpulse_prob", d.afterpulse_prob);
    d.afterpulse_window_ticks =
        j.value("afterpulse_window_ticks", d.afterpulse_window_ticks);
    d.dark_rate_hz = j.value("dark_rate_hz", d.dark_rate_hz);
}

json config_to_json_obj(const PipelineConfig& cfg) {
    json j;
    j["mode"] = cfg.mode;
    j["seed"] = cfg.seed;
    j["extractor"] = extractor_name(cfg.extractor);
    j["max_depth"] = cfg.max_depth;
    j["sample_period_ticks"] = cfg.sample_period_ticks;
    j["odeven_interval_ticks"] = cfg.odeven_interval_ticks;
    j["threads"] = cfg.threads;
    j["sim"] = {{"photon_rate_hz", cfg.sim.photon_rate_hz},
                {"duration_s", cfg.sim.duration_s},
                {"tick_s", cfg.sim.tick_s}};
    j["detector"] = detector_to_json(cfg.detector);
    json xt = json::array();
    for (const CrosstalkLink& l : cfg.array.crosstalk)
        xt.push_back({{"source", l.source}, {"target", l.target}, {"prob", l.prob}});
    j["array"] = {{"n_pixels", cfg.array.n_pixels},
                  {"n_tdc", cfg.array.n_tdc},
                  {"frame_time_s", cfg.array.frame_time_s},
                  {"n_frames", cfg.array.n_frames},
                  {"buffer_cap", cfg.array.buffer_cap},
                  {"tick_s", cfg.array.tick_s},
                  {"cycle_ticks", cfg.array.cycle_ticks},
                  {"pixel_rate_hz", cfg.array.pixel_rate_hz},
                  {"crosstalk", xt},
                  {"tdc_profile", cfg.array.tdc.bin_weights},
                  {"detector", detector_to_json(cfg.array.detector)}};
    j["conditioning"] = {{"auto_guard", cfg.conditioning.auto_guard},
                         {"guard", cfg.conditioning.guard},
                         {"band_lo", cfg.conditioning.band_lo},
                         {"band_hi", cfg.conditioning.band_hi},
                         {"cull_threshold", cfg.conditioning.cull_threshold},
                         {"cull_window_cycles", cfg.conditioning.cull_window_cycles},
                         {"cull_neighborhood", cfg.conditioning.cull_neighborhood}};
    return j;
}

TdcProfile tdc_from_json(const json& v, const TdcProfile& fallback) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "linospad") return TdcProfile::linospad_default();
        if (s.rfind("uniform:", 0) == 0)
            return TdcProfile::uniform(
                static_cast<unsigned>(std::stoul(s.substr(8))));
        throw std::invalid_argument("unknown tdc_profile: " + s);
    }
    if (v.is_array()) {
        TdcProfile p;
        p.bin_weights = v.get<std::vector<double>>();
        return p;
    }
    return fallback;
}

} // namespace

PipelineConfig parse_config(const std::string& json_text, const PipelineConfig& base) {
    json j = json::parse(json_text);
    if (j.contains("config")) j = j.at("config");
    PipelineConfig cfg = base;
    cfg.mode = j.value("mode", cfg.mode);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("extractor"))
        cfg.extractor = extractor_from_name(j.at("extractor").get<std::string>());
    cfg.max_depth = j.value("max_depth", cfg.max_depth);
    cfg.sample_period_ticks = j.value("sample_period_ticks", cfg.sample_period_ticks);
    cfg.odeven_interval_ticks =
        j.value("odeven_interval_ticks", cfg.odeven_interval_ticks);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("sim")) {
        const json& s = j.at("sim");
        cfg.sim.photon_rate_hz = s.value("photon_rate_hz", cfg.sim.photon_rate_hz);
        cfg.sim.duration_s = s.value("duration_s", cfg.sim.duration_s);
        cfg.sim.tick_s = s.value("tick_s", cfg.sim.tick_s);
    }
    if (j.contains("detector")) detector_from_json(j.at("detector"), cfg.detector);
    if (j.contains("array")) {
        const json& s = j.at("array");
        ArrayConfig& a = cfg.array;
        a.n_pixels = s.value("n_pixels", a.n_pixels);
        a.n_tdc = s.value("n_tdc", a.n_tdc);
        a.frame_time_s = s.value("frame_time_s", a.frame_time_s);
        a.n_frames = s.value("n_frames", a.n_frames);
        a.buffer_cap = s.value("buffer_cap", a.buffer_cap);
        a.tick_s = s.value("tick_s", a.tick_s);
        a.cycle_ticks = s.value("cycle_ticks", a.cycle_ticks);
        if (s.contains("pixel_rate_hz"))
            a.pixel_rate_hz = s.at("pixel_rate_hz").get<std::vector<double>>();
        if (s.contains("crosstalk")) {
            a.crosstalk.clear();
            for (const json& l : s.at("crosstalk"))
                a.crosstalk.push_back({l.at("source").get<uint32_t>(),
                                       l.at("target").get<uint32_t>(),
                                       l.at("prob").get<double>()});
        }
        if (s.contains("tdc_profile"))
            a.tdc = tdc_from_json(s.at("tdc_profile"), a.tdc);
        if (s.contains("detector")) detector_from_json(s.at("detector"), a.detector);
    }
    if (j.contains("conditioning")) {
        const json& s = j.at("conditioning");
        ConditioningConfig& c = cfg.conditioning;
        c.auto_guard = s.value("auto_guard", c.auto_guard);
        c.guard = s.value("guard", c.guard);
        c.band_lo = s.value("band_lo", c.band_lo);
        c.band_hi = s.value("band_hi", c.band_hi);
        c.cull_threshold = s.value("cull_threshold", c.cull_threshold);
        c.cull_window_cycles = s.value("cull_window_cycles", c.cull_window_cycles);
        c.cull_neighborhood = s.value("cull_neighborhood", c.cull_neighborhood);
    }
    return cfg;
}

std::string config_json(const PipelineConfig& cfg, int indent) {
    return config_to_json_obj(cfg).dump(indent);
}

std::string manifest_json(const PipelineConfig& cfg,
                          const std::vector<std::string>& outputs, int indent) {
    json j;
    j["tool"] = "spadrng";
    j["format_version"] = 1;
    j["config"] = config_to_json_obj(cfg);
    j["outputs"] = outputs;
    return j.dump(indent);
}

namespace {

json stats_to_json(const ExtractorStats& s) {
    return json{{"n_in", s.n_in},
                {"n_out", s.n_out},
                {"depth_reached", s.depth_reached},
                {"from_vn", s.from_vn},
                {"from_u", s.from_u},
                {"from_v", s.from_v}};
}

json report_to_json(const BitReport& b) {
    return json{{"n_bits", b.n_bits},
                {"ones", b.ones},
                {"bias", b.bias},
                {"entropy_bits", b.entropy},
                {"bias_in_band", b.bias_in_band},
                {"lags_checked", b.corr.r.size()},
                {"worst_lag", b.corr.worst_lag},
                {"worst_lag_corr", b.corr.worst_abs},
                {"corr_band_99", b.corr.band_99},
                {"lags_in_band", b.corr.all_in_band},
                {"passed", b.passed}};
}

} // namespace

std::string report_json(const RandyResult& r, int indent) {
    json j;
    j["mode"] = "randy";
    j["n_detected"] = r.n_detected;
    j["detected_rate_hz"] = r.detected_rate_hz;
    j["guard_samples"] = r.guard;
    j["histogram"] = {{"n_gaps", r.histogram.n_gaps},
                      {"floor_gap", r.histogram.floor_gap},
                      {"fit_q", r.histogram.fit_q},
                      {"fit_start", r.histogram.fit_start}};
    j["conditioning"] = {{"samples_in", r.conditioning.n_in},
                         {"samples_out", r.conditioning.n_out},
                         {"events_in", r.conditioning.ones_in},
                         {"events_out", r.conditioning.ones_out},
                         {"samples_removed_frac", r.conditioning.samples_removed_frac()},
                         {"events_lost_frac", r.conditioning.events_lost_frac()}};
    j["survivor_rate_hz"] = r.survivor_rate_hz;
    j["loss_fraction"] = r.loss_fraction;
    j["effective_sample_hz"] = r.effective_sample_hz;
    j["p1"] = r.p1;
    j["expected_rate_bits_s"] = r.expected_rate_bits_s;
    j["extractor"] = stats_to_json(r.extractor_stats);
    j["bits_out"] = r.bits.size();
    j["bits_per_second"] = r.bits_per_second;
    j["output"] = report_to_json(r.report);
    j["ks"] = {{"statistic", r.ks_statistic},
               {"critical_1pct", r.ks_critical},
               {"pass", r.ks_pass}};
    j["wall_seconds"] = r.wall_seconds;
    return j.dump(indent);
}

std::string report_json(const LinospadResult& r, int indent) {
    json j;
    j["mode"] = "linospad";
    j["n_frames"] = r.n_frames;
    j["live_time_s"] = r.live_time_s;
    j["total_tags"] = r.total_tags;
    j["mean_tag_rate_hz"] = r.mean_tag_rate_hz;
    j["guard_cycles"] = r.guard_cycles;
    j["pooled_histogram"] = {{"n_gaps", r.pooled_histogram.n_gaps},
                             {"floor_gap", r.pooled_histogram.floor_gap},
                             {"fit_q", r.pooled_histogram.fit_q},
                             {"fit_start", r.pooled_histogram.fit_start}};
    j["tdc_entropy_bits"] = r.tdc_entropy_bits;
    j["cull"] = {{"kept", r.cull.kept}, {"culled", r.cull.culled}};
    json offenders = json::array();
    for (const CoincidencePair& p : r.cull.pairs)
        if (p.prob > 0.0)
            offenders.push_back({{"a", p.a},
                                 {"b", p.b},
                                 {"coincidences", p.coincidences},
                                 {"prob", p.prob}});
    j["coincidence_pairs"] = offenders;
    json px = json::array();
    for (const PixelOutcome& o : r.pixels) {
        px.push_back({{"pixel", o.pixel},
                      {"kept", o.kept},
                      {"n_tags", o.n_tags},
                      {"coarse_bits", o.coarse_bits},
                      {"fine_bits", o.fine_bits},
                      {"coarse_bits_s", o.coarse_bits_s},
                      {"fine_bits_s", o.fine_bits_s},
                      {"fine_efficiency", o.fine_efficiency}});
    }
    j["pixels"] = px;
    j["rates"] = {{"coarse_total_bits_s", r.rates.coarse_total_bits_s},
                  {"fine_total_bits_s", r.rates.fine_total_bits_s},
                  {"total_bits_s", r.rates.total_bits_s},
                  {"coarse_mean_per_pixel", r.rates.coarse_mean_per_pixel},
                  {"fine_mean_per_pixel", r.rates.fine_mean_per_pixel},
                  {"coarse_mean_kept", r.rates.coarse_mean_kept},
                  {"n_pixels", r.rates.n_pixels},
                  {"n_kept", r.rates.n_kept}};
    j["coarse_output"] = report_to_json(r.coarse_report);
    j["fine_output"] = report_to_json(r.fine_report);
    j["wall_seconds"] = r.wall_seconds;
    return j.dump(indent);
}

} // namespace spadrng
