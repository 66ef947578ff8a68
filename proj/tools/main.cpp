// Command line front end: simulate detectors, run extraction pipelines,
// analyze bit files, tabulate rate curves.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spadrng/analysis.hpp"
#include "spadrng/io.hpp"
#include "spadrng/pipeline.hpp"

using namespace spadrng;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
    if (!out) throw std::runtime_error("short write to " + path);
}

struct ConfigArgs {
    std::string preset;
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<double> duration_s;
    std::optional<uint32_t> n_frames;
    std::optional<double> rate_hz;
    std::optional<std::string> extractor;
    std::optional<unsigned> max_depth;
    std::optional<unsigned> threads;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a) {
    cmd->add_option("--preset", a.preset, "start from a named preset (randy, linospad)")
        ->check(CLI::IsMember({"randy", "linospad"}));
    cmd->add_option("--config", a.config_path,
                    "JSON config or manifest; overrides the preset field by field");
    cmd->add_option("--seed", a.seed, "override the generator seed");
    cmd->add_option("--duration", a.duration_s, "capture duration in seconds (randy)");
    cmd->add_option("--frames", a.n_frames, "number of frames (linospad)");
    cmd->add_option("--rate", a.rate_hz, "photon rate in Hz (randy)");
    cmd->add_option("--extractor", a.extractor,
                    "peres, von-neumann, zhou-bruck, diff or odeven");
    cmd->add_option("--max-depth", a.max_depth, "extractor recursion depth");
    cmd->add_option("--threads", a.threads, "worker threads (0 = hardware)");
}

PipelineConfig resolve_config(const ConfigArgs& a) {
    PipelineConfig cfg;
    if (a.preset == "randy") cfg = randy_preset();
    else if (a.preset == "linospad") cfg = linospad_preset();
    else if (!a.preset.empty()) throw std::invalid_argument("unknown preset " + a.preset);
    if (!a.config_path.empty()) {
        std::ifstream in(a.config_path);
        if (!in) throw std::runtime_error("cannot open " + a.config_path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        cfg = parse_config(text, cfg);
    }
    if (a.seed) cfg.seed = *a.seed;
    if (a.duration_s) cfg.sim.duration_s = *a.duration_s;
    if (a.n_frames) cfg.array.n_frames = *a.n_frames;
    if (a.rate_hz) cfg.sim.photon_rate_hz = *a.rate_hz;
    if (a.extractor) cfg.extractor = extractor_from_name(*a.extractor);
    if (a.max_depth) cfg.max_depth = *a.max_depth;
    if (a.threads) cfg.threads = *a.threads;
    return cfg;
}

void write_histogram_csv(const std::string& path, const InterarrivalHistogram& h) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "gap,count,expected\n";
    for (uint64_t g = 0; g < h.counts.size(); ++g) {
        if (h.counts[g] == 0 && g < h.floor_gap) continue;
        out << g << ',' << h.counts[g] << ',' << h.expected_count(g) << '\n';
    }
}

int cmd_simulate(const ConfigArgs& args, const std::string& events_path,
                 const std::string& labels_path, const std::string& tags_path,
                 const std::string& manifest_path) {
    PipelineConfig cfg = resolve_config(args);
    cfg.validate();
    std::vector<std::string> outputs;
    if (cfg.mode == "randy") {
        SimConfig sim = cfg.sim;
        sim.seed = cfg.seed;
        PhotonEventStream arrivals = gen_poisson_arrivals(sim);
        PhotonEventStream detected = apply_detector(arrivals, cfg.detector, sim.seed);
        std::printf("arrivals %zu, detected %zu (%.1f kcps over %.3f s)\n",
                    arrivals.size(), detected.size(),
                    detected.size() / sim.duration_s / 1e3, sim.duration_s);
        if (!events_path.empty()) {
            io::write_events(events_path, detected);
            outputs.push_back(events_path);
            std::printf("wrote %s\n", events_path.c_str());
        }
        if (!labels_path.empty()) {
            io::write_labels(labels_path, detected.label);
            outputs.push_back(labels_path);
            std::printf("wrote %s\n", labels_path.c_str());
        }
    } else {
        ArrayResult res = simulate_array(cfg.array, cfg.seed);
        uint64_t tags = 0, ap = 0, xt = 0;
        for (uint32_t p = 0; p < cfg.array.n_tdc; ++p) {
            ap += res.afterpulse_counts[p];
            xt += res.crosstalk_counts[p];
        }
        for (const TagFrame& f : res.frames)
            for (const std::vector<Tag>& v : f.pixels) tags += v.size();
        std::printf("%zu frames, %" PRIu64 " tags (%.1f kcps/pixel), "
                    "%" PRIu64 " afterpulses, %" PRIu64 " crosstalk\n",
                    res.frames.size(), tags,
                    tags / (cfg.array.n_frames * cfg.array.frame_time_s) /
                        cfg.array.n_tdc / 1e3,
                    ap, xt);
        if (!tags_path.empty()) {
            io::write_tags(tags_path, res.frames, cfg.array.frame_time_s);
            outputs.push_back(tags_path);
            std::printf("wrote %s\n", tags_path.c_str());
        }
    }
    if (!manifest_path.empty()) {
        write_text(manifest_path, manifest_json(cfg, outputs));
        std::printf("wrote %s\n", manifest_path.c_str());
    }
    return 0;
}

int cmd_pipeline(const ConfigArgs& args, const std::string& events_path,
                 const std::string& tags_path, const std::string& bits_path,
                 const std::string& report_path, const std::string& manifest_path,
                 const std::string& histogram_path, bool check) {
    PipelineConfig cfg = resolve_config(args);
    cfg.validate();
    std::vector<std::string> outputs;
    bool pass = true;

    if (cfg.mode == "randy") {
        RandyResult r;
        if (!events_path.empty()) {
            PhotonEventStream ev = io::read_events(events_path);
            r = run_randy(cfg, &ev);
        } else {
            r = run_randy(cfg);
        }
        std::printf("detected %.1f kcps, guard %" PRIu64
                    ", survivors %.1f kcps (loss %.1f%%)\n",
                    r.detected_rate_hz / 1e3, r.guard, r.survivor_rate_hz / 1e3,
                    100.0 * r.loss_fraction);
        std::printf("effective sampling %.2f MHz, p1 %.3e, expected %.3f Mbit/s\n",
                    r.effective_sample_hz / 1e6, r.p1, r.expected_rate_bits_s / 1e6);
        std::printf("extractor %s: %" PRIu64 " bits (%.3f Mbit/s), bias %.2e, "
                    "worst lag %u (%.2e), %s\n",
                    extractor_name(cfg.extractor), r.bits.size(),
                    r.bits_per_second / 1e6, r.report.bias, r.report.corr.worst_lag,
                    r.report.corr.worst_abs, r.report.passed ? "pass" : "FAIL");
        if (r.ks_critical > 0.0)
            std::printf("gap KS %.2e (1%% critical %.2e) %s\n", r.ks_statistic,
                        r.ks_critical, r.ks_pass ? "pass" : "FAIL");
        if (!bits_path.empty()) {
            io::write_bits(bits_path, r.bits,
                           cfg.sample_period_ticks * cfg.sim.tick_s);
            outputs.push_back(bits_path);
            std::printf("wrote %s\n", bits_path.c_str());
        }
        if (!histogram_path.empty()) {
            write_histogram_csv(histogram_path, r.histogram);
            outputs.push_back(histogram_path);
        }
        if (!report_path.empty()) {
            write_text(report_path, report_json(r));
            outputs.push_back(report_path);
        }
        pass = r.report.passed && (r.ks_critical == 0.0 || r.ks_pass);
    } else {
        LinospadResult r;
        if (!tags_path.empty()) {
            io::TagsFile tf = io::read_tags(tags_path);
            r = run_linospad(cfg, &tf.frames);
        } else {
            r = run_linospad(cfg);
        }
        std::printf("%" PRIu64 " frames (%.3f s), %" PRIu64
                    " tags, %.1f kcps/pixel mean\n",
                    r.n_frames, r.live_time_s, r.total_tags,
                    r.mean_tag_rate_hz / 1e3);
        std::printf("guard %" PRIu64 " cycles, culled %zu of %u pixels\n",
                    r.guard_cycles, r.cull.culled.size(), r.rates.n_pixels);
        std::printf("coarse %.1f Mbit/s (%.2f per pixel), fine %.1f Mbit/s "
                    "(%.2f per pixel), total %.1f Mbit/s\n",
                    r.rates.coarse_total_bits_s / 1e6,
                    r.rates.coarse_mean_per_pixel / 1e6,
                    r.rates.fine_total_bits_s / 1e6,
                    r.rates.fine_mean_per_pixel / 1e6, r.rates.total_bits_s / 1e6);
        std::printf("coarse output %s, fine output %s\n",
                    r.coarse_report.passed ? "pass" : "FAIL",
                    r.fine_report.passed ? "pass" : "FAIL");
        if (!bits_path.empty()) {
            io::write_bits(bits_path, r.fine_bits, 0.0);
            std::string coarse_path = bits_path + ".coarse";
            io::write_bits(coarse_path, r.coarse_bits, cfg.array.cycle_ticks * cfg.array.tick_s);
            outputs.push_back(bits_path);
            outputs.push_back(coarse_path);
            std::printf("wrote %s and %s\n", bits_path.c_str(), coarse_path.c_str());
        }
        if (!histogram_path.empty()) {
            write_histogram_csv(histogram_path, r.pooled_histogram);
            outputs.push_back(histogram_path);
        }
        if (!report_path.empty()) {
            write_text(report_path, report_json(r));
            outputs.push_back(report_path);
        }
        pass = r.coarse_report.passed && r.fine_report.passed;
    }
    if (!manifest_path.empty()) {
        write_text(manifest_path, manifest_json(cfg, outputs));
        std::printf("wrote %s\n", manifest_path.c_str());
    }
    if (check && !pass) {
        std::fprintf(stderr, "statistical checks failed\n");
        return 2;
    }
    return 0;
}

int cmd_analyze(const std::string& bits_path, unsigned max_lag,
                const std::string& report_path) {
    io::BitsFile bf = io::read_bits(bits_path);
    if (bf.bits.size() < 100)
        throw std::runtime_error(bits_path + ": too short to analyze (" +
                                 std::to_string(bf.bits.size()) + " bits)");
    BitReport rep = analyze_bits(bf.bits, max_lag);
    std::printf("%" PRIu64 " bits, ones %.6f, bias %.3e (99%% band %.3e) %s\n",
                rep.n_bits,
                static_cast<double>(rep.ones) / static_cast<double>(rep.n_bits),
                rep.bias, 2.576 * 0.5 / std::sqrt(static_cast<double>(rep.n_bits)),
                rep.bias_in_band ? "pass" : "FAIL");
    std::printf("entropy %.6f bits/bit\n", rep.entropy);
    std::printf("lags 1..%zu: worst lag %u at %.3e (99%% band %.3e) %s\n",
                rep.corr.r.size(), rep.corr.worst_lag, rep.corr.worst_abs,
                rep.corr.band_99, rep.corr.all_in_band ? "pass" : "FAIL");
    if (!report_path.empty()) {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "{\n  \"n_bits\": %" PRIu64 ",\n  \"ones\": %" PRIu64
                      ",\n  \"bias\": %.9e,\n  \"entropy_bits\": %.9f,\n"
                      "  \"worst_lag\": %u,\n  \"worst_lag_corr\": %.9e,\n"
                      "  \"corr_band_99\": %.9e,\n  \"passed\": %s\n}\n",
                      rep.n_bits, rep.ones, rep.bias, rep.entropy,
                      rep.corr.worst_lag, rep.corr.worst_abs, rep.corr.band_99,
                      rep.passed ? "true" : "false");
        write_text(report_path, buf);
    }
    return rep.passed ? 0 : 2;
}

int cmd_rate_curve(double rate_hz, double f_lo, double f_hi, unsigned points,
                   double loss, const std::string& csv_path,
                   const std::string& gnuplot_path) {
    if (points < 2) throw std::invalid_argument("need at least 2 points");
    if (!(f_lo > 0.0 && f_hi > f_lo))
        throw std::invalid_argument("need 0 < min frequency < max frequency");
    std::vector<double> freqs(points);
    for (unsigned i = 0; i < points; ++i)
        freqs[i] = f_lo * std::pow(f_hi / f_lo, static_cast<double>(i) / (points - 1));
    std::vector<RatePoint> curve = rate_curve(rate_hz, freqs, loss);
    const RatePoint* best = &curve[0];
    for (const RatePoint& p : curve)
        if (p.rate_bits_s > best->rate_bits_s) best = &p;
    std::printf("peak entropy rate at f = %.3f Hz (analytic %.3f Hz)\n",
                best->sampling_hz, peak_entropy_frequency(rate_hz));
    std::printf("best tabulated point: %.1f Hz -> %.1f bit/s (p1 = %.3e)\n",
                best->sampling_hz, best->rate_bits_s, best->p1);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot open " + csv_path);
        out << "sampling_hz,p1,entropy_bits,rate_bits_s,effective_rate_bits_s\n";
        for (const RatePoint& p : curve)
            out << p.sampling_hz << ',' << p.p1 << ',' << p.entropy_bits << ','
                << p.rate_bits_s << ',' << p.effective_rate_bits_s << '\n';
        std::printf("wrote %s\n", csv_path.c_str());
    }
    if (!gnuplot_path.empty()) {
        std::string csv = csv_path.empty() ? "rate_curve.csv" : csv_path;
        write_text(gnuplot_path,
                   "set datafile separator ','\n"
                   "set logscale x\n"
                   "set xlabel 'sampling frequency (Hz)'\n"
                   "set ylabel 'entropy rate (bit/s)'\n"
                   "plot '" + csv + "' every ::1 using 1:4 with lines title 'rate', \\\n"
                   "     '" + csv + "' every ::1 using 1:5 with lines title 'effective'\n");
        std::printf("wrote %s\n", gnuplot_path.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPAD photon randomness toolkit"};
    app.require_subcommand(1);

    ConfigArgs sim_args;
    std::string sim_events, sim_labels, sim_tags, sim_manifest;
    CLI::App* sim = app.add_subcommand("simulate", "generate a detection record");
    add_config_options(sim, sim_args);
    sim->add_option("--events", sim_events, "write detected events (QRNGEVT1)");
    sim->add_option("--labels", sim_labels, "write truth labels (QRNGLBL1)");
    sim->add_option("--tags", sim_tags, "write array tag frames (QRNGTAG1)");
    sim->add_option("--manifest", sim_manifest, "write a reproducibility manifest");

    ConfigArgs pipe_args;
    std::string pipe_events, pipe_tags, pipe_bits, pipe_report, pipe_manifest,
        pipe_hist;
    bool pipe_no_check = false;
    CLI::App* pipe = app.add_subcommand("pipeline", "simulate or replay, then extract");
    add_config_options(pipe, pipe_args);
    pipe->add_option("--events", pipe_events, "replay a QRNGEVT1 file instead of simulating");
    pipe->add_option("--tags", pipe_tags, "replay a QRNGTAG1 file instead of simulating");
    pipe->add_option("--bits", pipe_bits, "write extracted bits (QRNGBIT1)");
    pipe->add_option("--report", pipe_report, "write the run report as JSON");
    pipe->add_option("--manifest", pipe_manifest, "write a reproducibility manifest");
    pipe->add_option("--histogram", pipe_hist, "write the gap histogram as CSV");
    pipe->add_flag("--no-check", pipe_no_check, "always exit 0 on a completed run");

    std::string an_bits, an_report;
    unsigned an_max_lag = 100;
    CLI::App* an = app.add_subcommand("analyze", "bias and correlation of a bit file");
    an->add_option("--bits", an_bits, "QRNGBIT1 file")->required();
    an->add_option("--max-lag", an_max_lag, "deepest autocorrelation lag");
    an->add_option("--report", an_report, "write the analysis as JSON");

    double rc_rate = 200e3, rc_lo = 1e3, rc_hi = 1e9, rc_loss = 0.0;
    unsigned rc_points = 200;
    std::string rc_csv, rc_gp;
    CLI::App* rc = app.add_subcommand("rate-curve",
                                      "entropy throughput versus sampling frequency");
    rc->add_option("--rate", rc_rate, "photon rate in Hz");
    rc->add_option("--min-freq", rc_lo, "lowest sampling frequency");
    rc->add_option("--max-freq", rc_hi, "highest sampling frequency");
    rc->add_option("--points", rc_points, "points, log spaced");
    rc->add_option("--loss", rc_loss, "conditioning loss fraction");
    rc->add_option("--csv", rc_csv, "write the curve as CSV");
    rc->add_option("--gnuplot", rc_gp, "write a gnuplot script for the CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim_args, sim_events, sim_labels, sim_tags, sim_manifest);
        if (pipe->parsed())
            return cmd_pipeline(pipe_args, pipe_events, pipe_tags, pipe_bits,
                                pipe_report, pipe_manifest, pipe_hist, !pipe_no_check);
        if (an->parsed()) return cmd_analyze(an_bits, an_max_lag, an_report);
        if (rc->parsed())
            return cmd_rate_curve(rc_rate, rc_lo, rc_hi, rc_points, rc_loss, rc_csv, rc_gp);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
