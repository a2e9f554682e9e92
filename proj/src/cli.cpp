#include "backtrack/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "backtrack/dataset_io.hpp"
#include "backtrack/errors.hpp"
#include "backtrack/metrics.hpp"
#include "backtrack/ncc_tracker.hpp"
#include "backtrack/runner.hpp"
#include "backtrack/synth.hpp"

namespace fs = std::filesystem;

namespace backtrack::cli {

namespace {

// Raised for flag combinations CLI11 cannot express; maps to kExitUsage.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SourceOptions {
    std::string seq;
    std::string synth;
    std::uint64_t seed = 0;
    int len = 0;
};

struct TrackOptions {
    SourceOptions source;
    std::string backtrack = "on";
    int n = 15;
    double sigma = 0.9;
    std::string backward_tracker = "same";
    std::string cond = "both";
    std::string early_rejection = "on";
    std::string early_termination = "on";
    std::string out = "out";
    bool svg = false;
};

struct SweepOptions {
    TrackOptions track;
    std::vector<int> n_list{5, 10, 15, 20, 25, 30};
    std::vector<double> sigma_list{0.7, 0.8, 0.9};
    int jobs = 0;
};

struct SynthOptions {
    std::string kind;
    std::uint64_t seed = 0;
    int len = 0;
    std::string out = "out";
};

// A loaded sequence: frames in memory plus ground truth.
struct LoadedSequence {
    std::string name;
    std::vector<Frame> frames;
    std::vector<BoundingBox> gt;
};

void add_source_options(CLI::App& cmd, SourceOptions& o) {
    auto* seq = cmd.add_option("--seq", o.seq, "Sequence directory (OTB/LaSOT/GOT-10k layout)");
    auto* synth = cmd.add_option("--synth", o.synth, "Synthetic scenario kind")
                      ->check(CLI::IsMember({"linear_motion", "appearance_drift", "occlusion", "distractor_cross",
                                             "shrink"}));
    seq->excludes(synth);
    cmd.add_option("--seed", o.seed, "Synthetic scenario seed");
    cmd.add_option("--len", o.len, "Synthetic scenario length in frames (0 = scenario default)")
        ->check(CLI::NonNegativeNumber);
}

void add_track_options(CLI::App& cmd, TrackOptions& o) {
    add_source_options(cmd, o.source);
    cmd.add_option("--backtrack", o.backtrack, "Template update by backward verification")
        ->check(CLI::IsMember({"on", "off"}));
    cmd.add_option("--n", o.n, "Template update cycle N in frames");
    cmd.add_option("--sigma", o.sigma, "Anchor IOU threshold");
    cmd.add_option("--backward-tracker", o.backward_tracker, "Tracker used for backward verification")
        ->check(CLI::IsMember({"same", "small"}));
    cmd.add_option("--cond", o.cond, "Acceptance conditions")->check(CLI::IsMember({"hits", "sigma0", "both"}));
    cmd.add_option("--early-rejection", o.early_rejection)->check(CLI::IsMember({"on", "off"}));
    cmd.add_option("--early-termination", o.early_termination)->check(CLI::IsMember({"on", "off"}));
    cmd.add_option("--out", o.out, "Output directory");
}

BackTrackConfig make_config(const TrackOptions& o, int n, double sigma) {
    BackTrackConfig cfg;
    cfg.n_update = n;
    cfg.sigma_thres = sigma;
    cfg.use_hit_count = o.cond != "sigma0";
    cfg.use_first_frame_iou = o.cond != "hits";
    cfg.enable_early_rejection = o.early_rejection == "on";
    cfg.enable_early_termination = o.early_termination == "on";
    try {
        cfg.validate();
    } catch (const InvalidConfig& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

NccConfig small_tracker_config() {
    NccConfig cfg;
    cfg.template_size = 32;
    return cfg;
}

LoadedSequence load_source(const SourceOptions& o) {
    if (o.seq.empty() == o.synth.empty()) {
        throw UsageError("exactly one of --seq or --synth is required");
    }
    LoadedSequence loaded;
    if (!o.synth.empty()) {
        const auto kind = parse_scenario_kind(o.synth);
        SynthSequence seq = generate(default_scenario(*kind, o.seed, o.len));
        loaded.name = seq.name;
        loaded.frames = std::move(seq.frames);
        loaded.gt = std::move(seq.gt);
        return loaded;
    }
    const SequenceSpec spec = discover_sequence(o.seq);
    loaded.name = spec.name;
    loaded.gt = parse_groundtruth(spec.gt_path);
    SequenceReader reader = load_sequence(spec);
    while (auto frame = reader.next()) {
        loaded.frames.push_back(std::move(*frame));
    }
    if (loaded.frames.size() != loaded.gt.size()) {
        throw LengthMismatch(fmt::format("{}: {} frames but {} ground-truth lines", spec.name, loaded.frames.size(),
                                         loaded.gt.size()));
    }
    return loaded;
}

RunResult run_once(const LoadedSequence& seq, const std::optional<BackTrackConfig>& cfg,
                   const std::string& backward_kind) {
    NccTracker forward;
    std::unique_ptr<NccTracker> small;
    if (cfg && backward_kind == "small") {
        small = std::make_unique<NccTracker>(small_tracker_config());
    }
    VectorFrameSource frames(seq.frames);
    return run_sequence(frames, seq.gt.front(), forward, small ? *small : forward, cfg);
}

int cmd_track(const TrackOptions& o, std::ostream& out) {
    const std::optional<BackTrackConfig> cfg =
        o.backtrack == "on" ? std::optional(make_config(o, o.n, o.sigma)) : std::nullopt;
    if (!cfg) {
        make_config(o, o.n, o.sigma);  // flags are validated even when unused
    }
    const LoadedSequence seq = load_source(o.source);
    const RunResult run = run_once(seq, cfg, o.backward_tracker);
    const EvalReport report = evaluate(run.boxes, seq.gt, run.stats);

    const fs::path dir(o.out);
    write_results(seq.name, run.boxes, run.decisions, dir);
    write_text_file(dir / (seq.name + ".metrics.json"), to_json(report));
    write_text_file(dir / (seq.name + ".success.csv"), success_csv(report));
    write_text_file(dir / (seq.name + ".norm_precision.csv"), norm_precision_csv(report));
    if (o.svg) {
        const LabeledCurve curve{cfg ? "NCC+BackTrack" : "NCC", report.success_curve};
        write_text_file(dir / (seq.name + ".success.svg"), success_svg(std::span(&curve, 1)));
    }
    out << fmt::format("{}: auc={:.4f} norm_precision={:.4f} verifications={} accepted={} hit_ratio={:.3f}\n",
                       seq.name, report.auc, report.norm_precision_auc, run.stats.attempts, run.stats.accepts,
                       report.hit_ratio);
    return kExitOk;
}

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
    if (o.n_list.empty() || o.sigma_list.empty()) {
        throw UsageError("--n-list and --sigma-list must be non-empty");
    }
    struct Point {
        int n;
        double sigma;
        BackTrackConfig cfg;
        double auc = 0.0;
        double hit_ratio = 0.0;
    };
    std::vector<Point> grid;
    for (int n : o.n_list) {
        for (double sigma : o.sigma_list) {
            grid.push_back(Point{n, sigma, make_config(o.track, n, sigma)});
        }
    }
    const LoadedSequence seq = load_source(o.track.source);
    const double baseline_auc = success_auc(run_once(seq, std::nullopt, "same").boxes, seq.gt).auc;

    // Each worker owns its trackers; results land in grid order.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                const RunResult run = run_once(seq, grid[i].cfg, o.track.backward_tracker);
                grid[i].auc = success_auc(run.boxes, seq.gt).auc;
                grid[i].hit_ratio = hit_ratio(run.stats);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                failure = std::current_exception();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto jobs = std::clamp<std::size_t>(o.jobs > 0 ? static_cast<std::size_t>(o.jobs) : hw, 1, grid.size());
    std::vector<std::jthread> pool;
    for (std::size_t j = 1; j < jobs; ++j) {
        pool.emplace_back(worker);
    }
    worker();
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::string csv = "n,sigma,auc,hit_ratio,auc_no_update\n";
    for (const auto& p : grid) {
        csv += fmt::format("{},{},{:.6f},{:.6f},{:.6f}\n", p.n, p.sigma, p.auc, p.hit_ratio, baseline_auc);
    }
    const fs::path dir(o.track.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    }
    write_text_file(dir / "sweep.csv", csv);
    out << fmt::format("{}: {} grid points, baseline auc={:.4f}, wrote {}\n", seq.name, grid.size(), baseline_auc,
                       (dir / "sweep.csv").string());
    return kExitOk;
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
    const auto kind = parse_scenario_kind(o.kind);
    const SynthSequence seq = generate(default_scenario(*kind, o.seed, o.len));
    const fs::path dir = fs::path(o.out) / seq.name;
    write_sequence(seq, dir);
    out << fmt::format("wrote {} frames to {}\n", seq.frames.size(), dir.string());
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Single-object tracking with backward-verified template updates"};
    app.name("btrack");
    app.require_subcommand(1);
    app.set_config("--config", "", "Read flags from a TOML/INI file");

    TrackOptions track;
    auto* track_cmd = app.add_subcommand("track", "Track one sequence and write boxes, decisions and metrics");
    add_track_options(*track_cmd, track);
    track_cmd->add_flag("--svg", track.svg, "Also write a success-plot SVG");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid over N and sigma and write sweep.csv");
    add_track_options(*sweep_cmd, sweep.track);
    sweep_cmd->add_option("--n-list", sweep.n_list, "Update cycles to sweep")->delimiter(',');
    sweep_cmd->add_option("--sigma-list", sweep.sigma_list, "Anchor IOU thresholds to sweep")->delimiter(',');
    sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads (0 = hardware concurrency)");

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic scenario in the on-disk sequence layout");
    synth_cmd->add_option("--kind", synth.kind)
        ->required()
        ->check(CLI::IsMember({"linear_motion", "appearance_drift", "occlusion", "distractor_cross", "shrink"}));
    synth_cmd->add_option("--seed", synth.seed);
    synth_cmd->add_option("--len", synth.len)->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--out", synth.out);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (track_cmd->parsed()) {
            return cmd_track(track, out);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep, out);
        }
        return cmd_synth(synth, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace backtrack::cli
