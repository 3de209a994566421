#pragma once

// On-disk checkpoint layout:
//
//   step_NNNNNN/
//     tensors.json        {"<name>": {"file": "<file>", "shape": [..]}, ...}
//     <name>.bin          one tensor per file (format below)
//     checkpoint.json     step, optimizer step count, train/test metrics
//
// Tensor file: 8-byte magic "GTLTENS1", u32 little-endian rank, rank u32
// little-endian dims, then the row-major float32 little-endian values.
//
// Tensor names: "param.<name>", "optim.m.<name>", "optim.v.<name>" and,
// when hidden states were captured on the test set, "state.layer<k>".

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "groktopo/models.hpp"
#include "groktopo/optim.hpp"

namespace groktopo {

inline constexpr char kTensorMagic[8] = {'G', 'T', 'L', 'T', 'E', 'N', 'S', '1'};

void write_tensor_file(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor_file(const std::filesystem::path& path);

/// Writes every tensor plus tensors.json into `dir` (created if missing).
void write_tensor_dir(const std::filesystem::path& dir, const std::map<std::string, Tensor>& tensors);
std::map<std::string, Tensor> read_tensor_dir(const std::filesystem::path& dir);

struct CheckpointRecord {
    std::int64_t step = 0;
    ModelParams params;
    OptimState optim;
    std::optional<CapturedStates> states;  // test-set hidden states
    EvalResult train;
    EvalResult test;
};

std::string step_dir_name(std::int64_t step);

void write_checkpoint(const std::filesystem::path& dir, const CheckpointRecord& record);

/// Reads a checkpoint; `layout` supplies parameter order and decay flags.
CheckpointRecord read_checkpoint(const std::filesystem::path& dir, const ModelConfig& config);

}  // namespace groktopo
