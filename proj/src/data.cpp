#include "groktopo/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "groktopo/error.hpp"
#include "groktopo/rng.hpp"

namespace groktopo {

std::vector<ModPair> build_pairs(int p) {
    if (p < 2) fail(ErrorKind::Config, "invalid modulus p=" + std::to_string(p) + " (need p >= 2)");
    std::vector<ModPair> pairs;
    pairs.reserve(static_cast<std::size_t>(p) * p);
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) pairs.push_back({a, b, (a + b) % p});
    }
    return pairs;
}

std::size_t train_size(double alpha, std::size_t n) {
    return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
}

std::size_t permuted_count(double p_frac, std::size_t n) {
    return static_cast<std::size_t>(std::floor(p_frac * static_cast<double>(n) + 0.5));
}

SplitDataset split_train_test(const std::vector<ModPair>& pairs, double alpha, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        fail(ErrorKind::Config, "invalid train fraction alpha=" + std::to_string(alpha) + " (need 0 < alpha <= 1)");
    }
    const auto root = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(pairs.size()))));
    if (root * root != pairs.size() || root < 2) {
        fail(ErrorKind::Contract, "pair table of size " + std::to_string(pairs.size()) + " is not a full p^2 table");
    }

    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = Rng::stream(seed, streams::kSplit);
    rng.shuffle(std::span(order));

    SplitDataset out;
    out.p = static_cast<int>(root);
    out.alpha = alpha;
    out.seed = seed;
    const std::size_t n_train = train_size(alpha, pairs.size());
    out.train.reserve(n_train);
    out.test.reserve(pairs.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? out.train : out.test).push_back(pairs[order[i]]);
    }
    return out;
}

std::vector<std::size_t> permuted_indices(std::size_t train_count, double p_frac, std::uint64_t seed) {
    if (!(p_frac >= 0.0 && p_frac <= 1.0)) {
        fail(ErrorKind::Config, "invalid permutation fraction p_frac=" + std::to_string(p_frac) + " (need 0 <= p_frac <= 1)");
    }
    const std::size_t k = permuted_count(p_frac, train_count);
    std::vector<std::size_t> idx(train_count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k slots hold a uniform k-subset.
    auto rng = Rng::stream(seed, streams::kPermuteSelect);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_int(train_count - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

SplitDataset permute_labels(const SplitDataset& split, double p_frac, std::uint64_t seed) {
    const auto idx = permuted_indices(split.train.size(), p_frac, seed);
    SplitDataset out = split;
    out.p_frac = p_frac;
    if (idx.empty()) return out;

    std::vector<int> labels;
    labels.reserve(idx.size());
    for (auto i : idx) labels.push_back(split.train[i].label);
    auto rng = Rng::stream(seed, streams::kPermuteLabels);
    rng.shuffle(std::span(labels));
    for (std::size_t k = 0; k < idx.size(); ++k) out.train[idx[k]].label = labels[k];
    return out;
}

}  // namespace groktopo
