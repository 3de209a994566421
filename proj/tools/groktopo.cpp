// groktopo: train, analyze, stats, plot and sweep subcommands.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "groktopo/analysis.hpp"
#include "groktopo/config.hpp"
#include "groktopo/error.hpp"
#include "groktopo/plot.hpp"
#include "groktopo/report.hpp"
#include "groktopo/sweep.hpp"
#include "groktopo/trainer.hpp"

namespace fs = std::filesystem;
using namespace groktopo;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string part; std::getline(in, part, ',');) {
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

struct TrainArgs {
    std::string config_file;
    std::string preset_name;
    std::string arch;
    int p = 0;
    double alpha = 0;
    double p_frac = -1;
    std::uint64_t seed = 0;
    int steps = 0;
    int checkpoint_every = 0;
    int capture_every = -1;
    std::string name;
    std::string out;
    bool force = false;
    bool quiet = false;
};

void add_train(CLI::App& app, TrainArgs& a, std::function<void()> run) {
    auto* cmd = app.add_subcommand("train", "Train one model and write a run directory");
    cmd->add_option("--config", a.config_file, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", a.preset_name, "Start from a preset: paper or desk");
    cmd->add_option("--arch", a.arch, "transformer or mlp");
    cmd->add_option("--p", a.p, "Prime modulus");
    cmd->add_option("--frac", a.alpha, "Training fraction alpha");
    cmd->add_option("--pfrac", a.p_frac, "Fraction of training labels permuted");
    cmd->add_option("--seed", a.seed, "Seed");
    cmd->add_option("--steps", a.steps, "Total optimization steps");
    cmd->add_option("--checkpoint-every", a.checkpoint_every, "Checkpoint cadence in steps");
    cmd->add_option("--capture-every", a.capture_every, "Hidden-state capture cadence (0 disables)");
    cmd->add_option("--name", a.name, "Run name (default derived from the config)");
    cmd->add_option("--out", a.out, "Run directory (default runs/<name>)");
    cmd->add_flag("--force", a.force, "Overwrite a non-empty run directory");
    cmd->add_flag("--quiet", a.quiet, "No progress output");
    cmd->callback(std::move(run));
}

ExperimentConfig train_config(const CLI::App& cmd, const TrainArgs& a) {
    ExperimentConfig c;
    if (!a.config_file.empty()) c = load_config(a.config_file);
    if (!a.preset_name.empty()) {
        if (!a.config_file.empty()) fail(ErrorKind::Config, "--config and --preset are exclusive");
        c = preset(a.preset_name);
    }
    const bool named = !a.config_file.empty() || !a.preset_name.empty();
    if (cmd.count("--arch")) c.arch = parse_arch(a.arch);
    if (cmd.count("--p")) c.p = a.p;
    if (cmd.count("--frac")) c.alpha = a.alpha;
    if (cmd.count("--pfrac")) c.p_frac = a.p_frac;
    if (cmd.count("--seed")) {
        c.seed = a.seed;
        c.seeds = {a.seed};
    }
    if (cmd.count("--steps")) c.optim.total_steps = a.steps;
    if (cmd.count("--checkpoint-every")) c.checkpoint_every = a.checkpoint_every;
    if (cmd.count("--capture-every")) c.capture_every = a.capture_every;
    if (!a.name.empty()) {
        c.name = a.name;
    } else if (!named || cmd.count("--seed") || cmd.count("--pfrac")) {
        c.name = run_name(c);
    }
    c.validate();
    return c;
}

struct AnalyzeArgs {
    std::vector<std::string> runs;
    std::string metrics;
    std::string layers;
    int every = 0;
    int lid_neighbors = 0;
    int lid_subsample = 0;
    int ph_subsample = 0;
    int fourier_k = 0;
    bool freeze = false;
    bool diagrams = false;
    int threads = 0;
    bool quiet = false;
};

AnalyzeOptions analyze_options(const CLI::App& cmd, const AnalyzeArgs& a, const ExperimentConfig& cfg) {
    AnalyzeOptions o;
    o.analysis = cfg.analysis;
    if (cmd.count("--metrics")) o.analysis.metrics = split_list(a.metrics);
    if (cmd.count("--layers")) o.analysis.layers = split_list(a.layers);
    if (cmd.count("--every")) o.analysis.every = a.every;
    if (cmd.count("--lid-neighbors")) o.analysis.lid_neighbors = a.lid_neighbors;
    if (cmd.count("--lid-subsample")) o.analysis.lid_subsample = a.lid_subsample;
    if (cmd.count("--ph-subsample")) o.analysis.ph_subsample = a.ph_subsample;
    if (cmd.count("--fourier-k")) o.analysis.fourier_k = a.fourier_k;
    if (a.freeze) o.analysis.freeze_key_freqs = true;
    if (a.diagrams) o.analysis.write_diagrams = true;
    o.threads = a.threads;
    o.quiet = a.quiet;
    return o;
}

std::vector<fs::path> expand_all(const std::vector<std::string>& patterns) {
    std::vector<fs::path> out;
    for (const auto& p : patterns) {
        for (auto& d : expand_run_pattern(p)) out.push_back(std::move(d));
    }
    return out;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Topological and geometric analysis of grokking on modular addition"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    TrainArgs ta;
    CLI::App* train_cmd = nullptr;
    add_train(app, ta, [&] {
        const auto cfg = train_config(*train_cmd, ta);
        const fs::path dir = ta.out.empty() ? fs::path("runs") / cfg.name : fs::path(ta.out);
        TrainOptions o;
        o.force = ta.force;
        o.quiet = ta.quiet;
        train(cfg, dir, o);
        std::cout << dir.string() << '\n';
    });
    train_cmd = app.get_subcommand("train");

    AnalyzeArgs aa;
    auto* analyze_cmd = app.add_subcommand("analyze", "Compute PH, LID and Fourier metrics for completed runs");
    analyze_cmd->add_option("runs", aa.runs, "Run directories or patterns (runs/mlp-*)")->required();
    analyze_cmd->add_option("--metrics", aa.metrics, "Comma-separated subset of ph,lid,fourier");
    analyze_cmd->add_option("--layers", aa.layers, "Comma-separated layers (embed,layer1,...)");
    analyze_cmd->add_option("--every", aa.every, "Analyze every n-th checkpoint");
    analyze_cmd->add_option("--lid-neighbors", aa.lid_neighbors, "TwoNN neighborhood size");
    analyze_cmd->add_option("--lid-subsample", aa.lid_subsample, "Points kept for LID");
    analyze_cmd->add_option("--ph-subsample", aa.ph_subsample, "Points kept for hidden-layer PH");
    analyze_cmd->add_option("--fourier-k", aa.fourier_k, "Number of key frequencies");
    analyze_cmd->add_flag("--freeze-key-freqs", aa.freeze, "Use the final checkpoint's key frequencies throughout");
    analyze_cmd->add_flag("--diagrams", aa.diagrams, "Also write persistence diagrams under diagrams/");
    analyze_cmd->add_option("--threads", aa.threads, "Checkpoints analyzed concurrently (capped by GROKTOPO_THREADS)");
    analyze_cmd->add_flag("--quiet", aa.quiet, "No progress output");
    analyze_cmd->callback([&] {
        for (const auto& dir : expand_all(aa.runs)) {
            const auto rows = analyze_run(dir, analyze_options(*analyze_cmd, aa, run_config(dir)));
            std::cout << (dir / "analysis.csv").string() << " (" << rows.size() << " rows)\n";
        }
    });

    std::vector<std::string> stats_runs;
    std::string stats_out = "report.csv";
    auto* stats_cmd = app.add_subcommand("stats", "Correlate metrics with test accuracy across analyzed runs");
    stats_cmd->add_option("runs", stats_runs, "Run directories or patterns")->required();
    stats_cmd->add_option("--out", stats_out, "Report CSV path");
    stats_cmd->callback([&] {
        std::vector<RunData> runs;
        for (const auto& dir : expand_all(stats_runs)) runs.push_back(load_run(dir));
        if (runs.empty()) fail(ErrorKind::Io, "stats: no run directories matched");
        const auto rows = build_report(runs);
        write_report_csv(stats_out, rows);
        std::cout << stats_out << " (" << rows.size() << " rows from " << runs.size() << " runs)\n";
    });

    std::vector<std::string> plot_inputs;
    std::string plot_out = "plots";
    auto* plot_cmd = app.add_subcommand("plot", "Render SVG figures from run directories or diagram CSVs");
    plot_cmd->add_option("inputs", plot_inputs, "Run directories, patterns, or diagram CSV files");
    plot_cmd->add_option("--out", plot_out, "Output directory");
    plot_cmd->callback([&] {
        std::vector<RunData> runs;
        std::vector<fs::path> written;
        for (const auto& in : plot_inputs) {
            if (fs::is_regular_file(in)) {
                written.push_back(plot::plot_diagram(in, plot_out));
                continue;
            }
            for (const auto& dir : expand_run_pattern(in)) runs.push_back(load_run(dir, false));
        }
        for (auto& f : plot::plot_runs(runs, plot_out)) written.push_back(std::move(f));
        if (written.empty()) {
            std::cerr << "warning: plot: nothing to plot\n";
            return;
        }
        for (const auto& f : written) std::cout << f.string() << '\n';
    });

    std::string sweep_name;
    SweepOptions so;
    std::string sweep_out = "runs";
    std::vector<std::uint64_t> sweep_seeds;
    std::int64_t sweep_steps = 0;
    bool no_analyze = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train and analyze a preset grid with a worker pool");
    sweep_cmd->add_option("grid", sweep_name, "desk, paper or paper-ablation")->required();
    sweep_cmd->add_option("--out", sweep_out, "Directory holding the run directories");
    sweep_cmd->add_option("--workers", so.workers, "Concurrent jobs (capped by GROKTOPO_THREADS)");
    sweep_cmd->add_option("--seeds", sweep_seeds, "Override the grid's seeds")->delimiter(',');
    sweep_cmd->add_option("--steps", sweep_steps, "Override total steps");
    sweep_cmd->add_flag("--no-analyze", no_analyze, "Train only");
    sweep_cmd->add_flag("--force", so.force, "Retrain complete runs");
    sweep_cmd->add_flag("--quiet", so.quiet, "No progress output");
    int sweep_status = 0;
    sweep_cmd->callback([&] {
        so.out_dir = sweep_out;
        so.analyze = !no_analyze;
        if (!sweep_seeds.empty()) so.seeds = sweep_seeds;
        if (sweep_cmd->count("--steps")) so.steps = sweep_steps;
        const auto result = run_sweep(sweep_grid(sweep_name), so);
        if (so.analyze && !result.completed.empty()) {
            std::vector<RunData> runs;
            for (const auto& d : result.completed) runs.push_back(load_run(d));
            write_report_csv(fs::path(sweep_out) / "report.csv", build_report(runs));
        }
        std::cout << result.completed.size() << " runs complete, " << result.failed.size() << " failed\n";
        if (!result.failed.empty()) sweep_status = 4;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return sweep_status;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
