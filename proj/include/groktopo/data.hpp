#pragma once

#include <cstdint>
#include <vector>

namespace groktopo {

struct ModPair {
    int a = 0;
    int b = 0;
    int label = 0;

    friend bool operator==(const ModPair&, const ModPair&) = default;
};

struct SplitDataset {
    int p = 0;
    double alpha = 1.0;
    std::uint64_t seed = 0;
    double p_frac = 0.0;
    std::vector<ModPair> train;
    std::vector<ModPair> test;

    friend bool operator==(const SplitDataset&, const SplitDataset&) = default;
};

/// All p^2 pairs in row-major (a, b) order labelled (a + b) mod p.
std::vector<ModPair> build_pairs(int p);

/// floor(alpha * n), robust to representation error in alpha (e.g. 0.7 * 100).
std::size_t train_size(double alpha, std::size_t n);

/// Half-up rounding of p_frac * n.
std::size_t permuted_count(double p_frac, std::size_t n);

/// Shuffles the pairs with the split stream of `seed` and takes the first
/// floor(alpha * p^2) as the training set.
SplitDataset split_train_test(const std::vector<ModPair>& pairs, double alpha, std::uint64_t seed);

/// Relabels round(p_frac * |train|) training examples chosen uniformly without
/// replacement by applying one uniform permutation to their labels. A sampled
/// permutation may leave some labels in place. Test labels are never touched.
SplitDataset permute_labels(const SplitDataset& split, double p_frac, std::uint64_t seed);

/// Indices of the training examples that permute_labels would select.
std::vector<std::size_t> permuted_indices(std::size_t train_count, double p_frac, std::uint64_t seed);

}  // namespace groktopo
