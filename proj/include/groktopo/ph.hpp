#pragma once

// Vietoris-Rips persistent homology in degrees 0 and 1.
//
// Simplices are ordered by (filtration value, dimension, lexicographic
// vertex tuple). H0 comes from Kruskal's algorithm with the elder rule. H1 is
// computed as persistent cohomology: edge columns are reduced in reverse
// filtration order against the coboundary matrix, the pivot of a column being
// its earliest triangle. Edges that kill an H0 class have zero columns and are
// skipped (clearing). Only bars with death > birth are reported.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "groktopo/cloud.hpp"

namespace groktopo {

/// Symmetric n x n Euclidean distance matrix with a zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;

    /// Validates symmetry, zero diagonal and finite non-negative entries.
    DistanceMatrix(std::size_t n, std::vector<double> values);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    std::span<const double> values() const { return d_; }

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

/// Pairwise Euclidean distances (double precision). Throws on non-finite
/// coordinates or an empty cloud.
DistanceMatrix distance_matrix(const PointCloud& cloud);

/// min_i max_j d(i, j): the Rips complex is a cone from this scale on.
double enclosing_radius(const DistanceMatrix& d);

struct Bar {
    double birth = 0;
    double death = 0;

    double persistence() const { return death - birth; }
    friend auto operator<=>(const Bar&, const Bar&) = default;
};

struct H0Result {
    std::vector<Bar> bars;  // finite bars (0, w), ascending
    int essential = 0;
};

struct PersistenceDiagram {
    std::vector<Bar> h0_bars;
    int h0_essential_count = 0;
    std::vector<Bar> h1_bars;

    friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

struct DiagramStats {
    double h0_max = 0;
    double h0_total = 0;
    double h1_max = 0;
    double h1_total = 0;
};

H0Result rips_h0(const DistanceMatrix& d);

/// H1 bars of the Rips filtration truncated at `threshold` (default: the
/// enclosing radius), sorted ascending. Throws on a negative threshold.
std::vector<Bar> rips_h1(const DistanceMatrix& d, std::optional<double> threshold = std::nullopt);

PersistenceDiagram rips_diagram(const DistanceMatrix& d, std::optional<double> threshold = std::nullopt);

/// Max and sum of finite-bar persistences per degree; the essential H0 class
/// is not counted.
DiagramStats diagram_stats(const PersistenceDiagram& diagram);

/// CSV with columns degree,birth,death; essential classes have death "inf".
void write_diagram_csv(const std::filesystem::path& path, const PersistenceDiagram& diagram);
PersistenceDiagram read_diagram_csv(const std::filesystem::path& path);

}  // namespace groktopo
