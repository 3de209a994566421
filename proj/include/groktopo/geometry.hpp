#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "groktopo/checkpoint.hpp"
#include "groktopo/cloud.hpp"

namespace groktopo {

/// Raw cloud for `source` from a checkpoint. The token embedding is read
/// from the parameters; hidden layers need captured test-set states.
/// Transformer position -1 stacks position 0 rows, then position 1 rows.
PointCloud extract_cloud(const CheckpointRecord& checkpoint, const CloudSource& source, const std::string& run_id = {});

/// Centers the rows and divides by the mean row norm of the centered cloud.
PointCloud normalize_cloud(const PointCloud& cloud);

/// Uniform selection without replacement of min(n, n_max) rows, kept in
/// their original order. Identity when n <= n_max.
PointCloud subsample(const PointCloud& cloud, std::size_t n_max, std::uint64_t seed);

/// Drops rows that exactly equal an earlier row.
PointCloud deduplicate(const PointCloud& cloud);

struct LidEstimate {
    std::vector<double> per_point;
    double mean = 0;
    double std = 0;  // population standard deviation of per_point
    int neighborhood = 0;
};

/// TwoNN maximum-likelihood estimate d = m / sum(log(r2 / r1)) over a set of
/// ratios. Throws when the sum is not positive.
double twonn_mle(const std::vector<double>& mu);

/// Local TwoNN: for every point, its L nearest neighbors (the point itself
/// excluded) form a neighborhood; each member's first and second nearest
/// neighbors within the neighborhood give a ratio mu, and the point's
/// estimate is twonn_mle over those L ratios. Requires n >= L + 1 distinct
/// points; deduplicate first.
LidEstimate pointwise_lid(const PointCloud& cloud, int neighbors = 64);

/// Single TwoNN fit over the whole cloud.
double global_twonn(const PointCloud& cloud);

}  // namespace groktopo
