#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "groktopo/analysis.hpp"
#include "groktopo/config.hpp"
#include "groktopo/stats.hpp"
#include "groktopo/trainer.hpp"

namespace groktopo {

/// Everything `stats` and `plot` need from one analyzed run directory.
struct RunData {
    std::filesystem::path dir;
    ExperimentConfig config;
    std::vector<MetricsRow> metrics;
    std::vector<AnalysisRow> analysis;  // empty when the run was not analyzed

    std::string id() const { return dir.filename().string(); }
};

RunData load_run(const std::filesystem::path& run_dir, bool require_analysis = true);

/// Metrics correlated against test accuracy, in report order.
inline const std::vector<std::string> kReportMetrics{"h0_max",   "h0_total",       "h1_max",      "h1_total",
                                                     "lid_mean", "restricted_acc", "excluded_acc"};

/// Value of an analysis.csv column for one row, if present.
std::optional<double> metric_value(const AnalysisRow& row, const std::string& metric);

/// (steps, values) of `metric` at `layer`, and the test accuracy at those steps.
struct AlignedSeries {
    MetricSeries metric;
    MetricSeries test_acc;
};
std::optional<AlignedSeries> aligned_series(const RunData& run, const std::string& metric, const std::string& layer);

struct ReportRow {
    std::string metric;
    std::string layer;
    double p_frac = 0;
    double rho_mean = 0;  // NaN when no seed gave a defined correlation
    double rho_sd = 0;
    bool significant = false;
    std::optional<std::int64_t> best_lag_steps;  // negative: accuracy leads
    // extra columns
    std::string arch;
    int p = 0;
    double alpha = 0;
    std::size_t n_checkpoints = 0;
    std::vector<double> rho_per_seed;  // NaN for an undefined seed
    std::vector<std::string> runs;
};

inline const std::vector<std::string> kReportColumns{
    "metric", "layer", "p_frac", "rho_mean", "rho_sd", "significant", "best_lag_steps",
    "arch",   "p",     "alpha",  "n_checkpoints", "n_seeds", "rho_per_seed"};

/// Groups runs by (arch, p, alpha, p_frac); for every (metric, layer) with
/// data, correlates the metric with test accuracy per seed and aggregates.
/// Runs of one group must share the analyzed checkpoint grid.
std::vector<ReportRow> build_report(const std::vector<RunData>& runs);

void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

/// Run directories matched by a glob-like pattern: a literal directory, or a
/// path whose final component contains '*' or '?' wildcards.
std::vector<std::filesystem::path> expand_run_pattern(const std::string& pattern);

}  // namespace groktopo
