#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "groktopo/models.hpp"
#include "groktopo/optim.hpp"

namespace groktopo {

inline constexpr const char* kToolVersion = "0.1.0";

/// Analysis knobs used by `analyze` (and by `sweep` after training).
struct AnalysisOptions {
    std::vector<std::string> metrics{"ph", "lid", "fourier"};
    std::vector<std::string> layers;  // empty: embed plus every hidden layer
    int every = 1;                    // analyze every n-th checkpoint
    int lid_neighbors = 64;
    int lid_subsample = 2000;
    int ph_subsample = 400;           // hidden-state clouds larger than this are subsampled for PH
    int fourier_k = 5;
    bool freeze_key_freqs = false;    // use the final checkpoint's key set everywhere
    bool write_diagrams = false;      // also write per-(step, layer) diagram CSVs

    friend bool operator==(const AnalysisOptions&, const AnalysisOptions&) = default;
};

struct ExperimentConfig {
    std::string name = "run";
    Arch arch = Arch::Transformer;
    int p = 113;
    double alpha = 0.3;
    double p_frac = 0.0;
    std::uint64_t seed = 46;
    OptimHyper optim;
    int checkpoint_every = 500;
    int capture_every = 500;  // 0 disables hidden-state capture in checkpoints
    TransformerConfig transformer;
    MlpConfig mlp;
    AnalysisOptions analysis;
    std::vector<std::uint64_t> seeds{46, 47, 48, 49, 50};

    /// Architecture config with p propagated from the experiment.
    ModelConfig model() const;
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// Named presets: "paper" (transformer, p=197, alpha=0.3, 60k steps) and
/// "desk" (MLP, p=97, alpha=0.5, 30k steps).
ExperimentConfig preset(const std::string& name);

}  // namespace groktopo
