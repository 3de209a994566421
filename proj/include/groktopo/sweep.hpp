#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "groktopo/analysis.hpp"
#include "groktopo/config.hpp"

namespace groktopo {

/// Directory name of a run: "<arch>-p<p>-a<alpha>-pf<p_frac>-s<seed>".
std::string run_name(const ExperimentConfig& config);

/// Named grids, one config per run:
///   desk            MLP, p=97, alpha=0.5, 30k steps, P_frac {0, 1}, seed 46
///   paper           p {113, 149, 197} x alpha {0.2, 0.25, 0.3} x seeds 46-50 x both archs
///   paper-ablation  p=197; transformer alpha=0.3 with P_frac {0, .01, .02, .05, .1, .2},
///                   MLP alpha=0.2 with P_frac {0, .1, .2, .5, 1}; seeds 46-50
std::vector<ExperimentConfig> sweep_grid(const std::string& name);

struct SweepOptions {
    std::filesystem::path out_dir = "runs";
    int workers = 0;  // 0: GROKTOPO_THREADS or hardware concurrency
    bool analyze = true;
    bool force = false;  // retrain runs that are already complete
    bool quiet = false;
    std::optional<std::vector<std::uint64_t>> seeds;  // override the grid's seeds
    std::optional<std::int64_t> steps;                // override total steps
};

struct SweepResult {
    std::vector<std::filesystem::path> completed;
    std::vector<std::pair<std::filesystem::path, std::string>> failed;
};

/// Trains (then analyzes) every config in its own directory under out_dir
/// using a pool of workers. Complete runs are reused unless `force`. A failing
/// job is recorded and does not stop the others.
SweepResult run_sweep(std::vector<ExperimentConfig> configs, const SweepOptions& options);

}  // namespace groktopo
