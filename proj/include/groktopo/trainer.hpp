#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "groktopo/checkpoint.hpp"
#include "groktopo/config.hpp"
#include "groktopo/data.hpp"
#include "groktopo/rng.hpp"

namespace groktopo {

struct MetricsRow {
    std::int64_t step = 0;
    double train_loss = 0;
    double train_acc = 0;
    double test_loss = 0;
    double test_acc = 0;
};

inline const std::vector<std::string> kMetricsColumns{"step", "train_loss", "train_acc", "test_loss", "test_acc"};

std::vector<MetricsRow> read_metrics(const std::filesystem::path& csv_path);

/// Dataset of a run: split by seed, then label corruption by seed.
SplitDataset make_dataset(const ExperimentConfig& config);

/// Steps at which a checkpoint is written: 0, every `checkpoint_every`
/// steps, and the final step.
std::vector<std::int64_t> checkpoint_steps(const ExperimentConfig& config);

/// Training-set indices for one update. Epochs are Fisher-Yates shuffles of
/// the training set drawn from the batch stream; a batch that runs past the
/// end of an epoch is completed by wrapping to the start of the same epoch's
/// order, and the next batch starts a fresh epoch.
class BatchSampler {
public:
    BatchSampler(std::size_t train_count, std::size_t batch_size, std::uint64_t seed);
    std::vector<std::size_t> next();

private:
    std::size_t batch_size_;
    std::vector<std::size_t> order_;
    std::size_t pos_;
    Rng rng_;
};

struct TrainOptions {
    bool force = false;  // wipe an existing non-empty run directory
    bool quiet = false;
    /// Called after every checkpoint (tests use it to observe progress).
    std::function<void(const CheckpointRecord&)> on_checkpoint;
};

/// Loss and parameter gradients for one batch (float32 graph).
struct StepResult {
    double loss = 0;
    std::vector<Tensor> grads;
};
StepResult loss_and_grads(const ModelConfig& model, const ModelParams& params, std::span<const ModPair> batch);

/// Runs a full training job into `run_dir`:
///   manifest.json   config snapshot, version, timestamps, checkpoint index, status
///   split.json      the exact train/test split (audit)
///   metrics.csv     step,train_loss,train_acc,test_loss,test_acc
///   step_NNNNNN/    checkpoints (see checkpoint.hpp)
void train(const ExperimentConfig& config, const std::filesystem::path& run_dir, const TrainOptions& options = {});

/// Run manifest helpers.
nlohmann::json read_manifest(const std::filesystem::path& run_dir);
ExperimentConfig run_config(const std::filesystem::path& run_dir);

}  // namespace groktopo
