#include "parex/cli.hpp"

#include "parex/annotations.hpp"
#include "parex/core.hpp"
#include "parex/geometry.hpp"
#include "parex/metrics.hpp"
#include "parex/prompt.hpp"
#include "parex/scheduler.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace parex {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitInvalidPlan = 2;

struct VideoInputs {
    std::string video_id;
    AnnotationSet annotations;
    Trajectory trajectory;
};

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Timeline load_meta(const fs::path& dir, std::string& video_id) {
    auto in = open_input(dir / "meta.json");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error((dir / "meta.json").string() + ": " + e.what());
    }
    Timeline timeline;
    if (!doc.contains("length_frames") || !doc["length_frames"].is_number_integer()) {
        throw std::runtime_error((dir / "meta.json").string() +
                                 ": missing integer 'length_frames'");
    }
    timeline.length_frames = doc["length_frames"].get<FrameIndex>();
    timeline.fps = doc.value("fps", 1.0);
    video_id = doc.value("video_id", std::string{});
    if (timeline.length_frames < 1) {
        throw std::runtime_error((dir / "meta.json").string() + ": length_frames must be >= 1");
    }
    if (!(timeline.fps > 0.0) || !std::isfinite(timeline.fps)) {
        throw std::runtime_error((dir / "meta.json").string() + ": fps must be positive");
    }
    return timeline;
}

// Loads the per-video annotation directory: meta.json, actions.csv,
// poses.csv, tracks.csv, causal.csv. Everything parses before any
// computation starts.
VideoInputs load_video_dir(const std::string& dir_str) {
    const fs::path dir(dir_str);
    VideoInputs inputs;
    inputs.annotations.timeline = load_meta(dir, inputs.video_id);
    try {
        auto actions = open_input(dir / "actions.csv");
        inputs.annotations.actions = load_actions(actions);
        auto tracks = open_input(dir / "tracks.csv");
        inputs.annotations.tracks = load_object_tracks(tracks);
        auto causal = open_input(dir / "causal.csv");
        inputs.annotations.causal_pairs = load_causal_pairs(causal);
        auto poses = open_input(dir / "poses.csv");
        inputs.trajectory = load_poses(poses);
    } catch (const ParseError& e) {
        throw std::runtime_error(dir.string() + ": " + e.what());
    }
    return inputs;
}

struct EvaluateArgs {
    std::string plan_path;
    std::string ann_dir;
    std::string out_path;
    std::string variant = "fraction";
    bool table = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
    const VideoInputs inputs = load_video_dir(args.ann_dir);

    auto plan_stream = open_input(args.plan_path);
    const LoadedPlan loaded = load_plan(plan_stream);
    if (!loaded.report.ok()) {
        std::cerr << "invalid plan " << args.plan_path << ":\n" << loaded.report.to_string();
        return kExitInvalidPlan;
    }
    const Timeline& meta = inputs.annotations.timeline;
    if (loaded.plan.timeline.length_frames != meta.length_frames) {
        throw std::runtime_error("plan length_frames " +
                                 std::to_string(loaded.plan.timeline.length_frames) +
                                 " does not match meta.json " +
                                 std::to_string(meta.length_frames));
    }
    if (loaded.plan.timeline.fps != meta.fps) {
        throw std::runtime_error("plan fps does not match meta.json");
    }

    EvaluateOptions options;
    options.coverage_variant = args.variant == "segment-iou" ? CoverageVariant::SegmentIou
                                                             : CoverageVariant::AgentFraction;
    options.video_id = !loaded.video_id.empty() ? loaded.video_id : inputs.video_id;
    const MetricReport report =
        evaluate_all(loaded.plan, inputs.annotations, inputs.trajectory, options);
    write_file(args.out_path, report_to_json(report));
    if (args.table) std::cout << render_table(report);
    return kExitOk;
}

struct ScheduleArgs {
    std::string method;
    std::string ann_dir;
    std::string out_path;
    std::string rules_path;
    int n_agents = 2;
    FrameIndex window = 0;  // 0 selects the 60-second default
};

int cmd_schedule(const ScheduleArgs& args) {
    PrecedenceRules rules = PrecedenceRules::defaults();
    if (!args.rules_path.empty()) {
        auto in = open_input(args.rules_path);
        rules = PrecedenceRules::parse(in);
    }

    std::string video_id;
    ParallelPlan plan;
    if (args.method == "naive") {
        const Timeline timeline = load_meta(fs::path(args.ann_dir), video_id);
        plan = naive_split(timeline, args.n_agents);
    } else {
        const VideoInputs inputs = load_video_dir(args.ann_dir);
        video_id = inputs.video_id;
        if (args.method == "heft-gt") {
            plan = heft_gt(inputs.annotations, args.n_agents, rules);
        } else {
            plan = heft_window(inputs.annotations, args.n_agents, args.window, rules);
        }
    }

    std::ostringstream buffer;
    save_plan(plan, buffer, video_id);
    write_file(args.out_path, buffer.str());
    std::cout << "makespan: " << plan_makespan(plan) << "\n"
              << "frame_coverage: " << frame_coverage(plan) << "\n";
    return kExitOk;
}

struct ZonesArgs {
    std::string ann_dir;
    std::string out_path;
    double cell_size = 1.2;
    int gmm_k = 0;  // 0 = grid zones
    unsigned seed = 0;
};

int cmd_zones(const ZonesArgs& args) {
    const VideoInputs inputs = load_video_dir(args.ann_dir);
    const ZoneOccupancy zones = args.gmm_k > 0
                                    ? gmm_zones(inputs.trajectory, args.gmm_k, args.seed)
                                    : grid_zones(inputs.trajectory, args.cell_size);
    write_file(args.out_path, spatial_csv(zones, inputs.annotations.timeline.fps));
    return kExitOk;
}

struct PromptArgs {
    std::string tier = "base";
    std::string zones_path;
    std::string ann_dir;
    std::string out_path;
    int n_agents = 2;
};

int cmd_prompt(const PromptArgs& args) {
    PromptTier tier;
    tier.tier = prompt_tier_from_string(args.tier);
    tier.n_agents = args.n_agents;
    if (!args.ann_dir.empty()) {
        std::string video_id;
        tier.fps = load_meta(fs::path(args.ann_dir), video_id).fps;
    }
    if (tier.tier == PromptTierKind::Spatial && args.zones_path.empty()) {
        throw std::runtime_error("--tier spatial requires --zones");
    }
    if (!args.zones_path.empty()) {
        auto in = open_input(args.zones_path);
        tier.zones = parse_spatial_csv(in, tier.fps);
    }
    write_file(args.out_path, render_prompt(tier));
    return kExitOk;
}

struct AggregateArgs {
    std::vector<std::string> report_paths;
    std::string out_path;
    bool table = false;
};

int cmd_aggregate(const AggregateArgs& args) {
    std::vector<MetricReport> reports;
    for (const std::string& path : args.report_paths) {
        auto in = open_input(path);
        reports.push_back(report_from_json(in));
    }
    const MetricSummary summary = aggregate(reports);
    write_file(args.out_path, summary_to_json(summary));
    if (args.table) std::cout << render_table(summary);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"parallel-execution planning and evaluation toolkit"};
    app.require_subcommand(1);

    EvaluateArgs evaluate_args;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score a plan against annotations");
    evaluate->add_option("--plan", evaluate_args.plan_path, "plan document")->required();
    evaluate->add_option("--ann", evaluate_args.ann_dir, "annotation directory")->required();
    evaluate->add_option("--out", evaluate_args.out_path, "report output path")->required();
    evaluate->add_option("--metric-variant", evaluate_args.variant, "action coverage variant")
        ->check(CLI::IsMember({"fraction", "segment-iou"}));
    evaluate->add_flag("--table", evaluate_args.table, "print the human-readable table");

    ScheduleArgs schedule_args;
    CLI::App* schedule = app.add_subcommand("schedule", "generate a baseline plan");
    schedule->add_option("--method", schedule_args.method, "naive | heft-gt | heft-window")
        ->required()
        ->check(CLI::IsMember({"naive", "heft-gt", "heft-window"}));
    schedule->add_option("--ann", schedule_args.ann_dir, "annotation directory")->required();
    schedule->add_option("--out", schedule_args.out_path, "plan output path")->required();
    schedule->add_option("--n", schedule_args.n_agents, "number of agents")
        ->check(CLI::PositiveNumber);
    schedule->add_option("--window", schedule_args.window, "window length in frames");
    schedule->add_option("--rules", schedule_args.rules_path, "verb-order rules file");

    ZonesArgs zones_args;
    CLI::App* zones = app.add_subcommand("zones", "export the zone occupancy CSV");
    zones->add_option("--ann", zones_args.ann_dir, "annotation directory")->required();
    zones->add_option("--out", zones_args.out_path, "zone CSV output path")->required();
    zones->add_option("--size", zones_args.cell_size, "grid cell size in meters")
        ->check(CLI::PositiveNumber);
    zones->add_option("--gmm", zones_args.gmm_k, "use a Gaussian mixture with k components")
        ->check(CLI::PositiveNumber);
    zones->add_option("--seed", zones_args.seed, "mixture fitting seed");

    PromptArgs prompt_args;
    CLI::App* prompt = app.add_subcommand("prompt", "render a prompt tier");
    prompt->add_option("--tier", prompt_args.tier, "base | goals | goals_constraints | spatial")
        ->required()
        ->check(CLI::IsMember({"base", "goals", "goals_constraints", "spatial"}));
    prompt->add_option("--n", prompt_args.n_agents, "number of agents")
        ->check(CLI::PositiveNumber);
    prompt->add_option("--zones", prompt_args.zones_path, "zone CSV for the spatial tier");
    prompt->add_option("--ann", prompt_args.ann_dir, "annotation directory (for fps)");
    prompt->add_option("--out", prompt_args.out_path, "prompt output path")->required();

    AggregateArgs aggregate_args;
    CLI::App* agg = app.add_subcommand("aggregate", "average report files into a summary");
    agg->add_option("reports", aggregate_args.report_paths, "report JSON files")
        ->required()
        ->expected(-1);
    agg->add_option("--out", aggregate_args.out_path, "summary output path")->required();
    agg->add_flag("--table", aggregate_args.table, "print the human-readable table");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
        if (schedule->parsed()) return cmd_schedule(schedule_args);
        if (zones->parsed()) return cmd_zones(zones_args);
        if (prompt->parsed()) return cmd_prompt(prompt_args);
        if (agg->parsed()) return cmd_aggregate(aggregate_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace parex
