#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "groktopo/config.hpp"
#include "groktopo/ph.hpp"

namespace groktopo {

/// One analysis.csv row. Metrics that were not computed stay empty.
struct AnalysisRow {
    std::int64_t step = 0;
    std::string layer;  // "embed", "layer1", "layer2", ...
    std::optional<DiagramStats> ph;
    std::optional<double> lid_mean;
    std::optional<double> lid_std;
    std::optional<double> restricted_acc;
    std::optional<double> excluded_acc;
    std::optional<std::vector<int>> key_freqs;
};

inline const std::vector<std::string> kAnalysisColumns{"step",     "layer",    "h0_max",         "h0_total",
                                                       "h1_max",   "h1_total", "lid_mean",       "lid_std",
                                                       "restricted_acc", "excluded_acc", "key_freqs"};

/// Layer labels of an architecture: "embed" then one per hidden layer.
std::vector<std::string> layer_labels(const ExperimentConfig& config);

struct AnalyzeOptions {
    AnalysisOptions analysis;
    int threads = 1;      // checkpoints analyzed concurrently
    bool quiet = false;
};

/// Computes the requested metrics for every (analyzed checkpoint, layer) of a
/// completed run and writes <run_dir>/analysis.csv (plus diagrams/ when
/// requested). Checkpoints listed in the manifest but missing on disk are
/// reported on stderr and skipped. Returns the rows written.
std::vector<AnalysisRow> analyze_run(const std::filesystem::path& run_dir, const AnalyzeOptions& options);

void write_analysis_csv(const std::filesystem::path& path, const std::vector<AnalysisRow>& rows);
std::vector<AnalysisRow> read_analysis_csv(const std::filesystem::path& path);

/// Worker count from GROKTOPO_THREADS (unset: hardware concurrency), capped
/// by `requested` when positive.
int worker_limit(int requested = 0);

}  // namespace groktopo
