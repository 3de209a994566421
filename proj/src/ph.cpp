#include "groktopo/ph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "groktopo/csv.hpp"
#include "groktopo/error.hpp"
#include "groktopo/kernels.hpp"

namespace groktopo {

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values) : n_(n), d_(std::move(values)) {
    if (d_.size() != n_ * n_) {
        fail(ErrorKind::Shape, "distance matrix of size " + std::to_string(n_) + " given " + std::to_string(d_.size()) +
                                   " entries");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        if (d_[i * n_ + i] != 0.0) fail(ErrorKind::Contract, "distance matrix has nonzero diagonal at " + std::to_string(i));
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double v = d_[i * n_ + j];
            if (!std::isfinite(v) || v < 0.0) {
                fail(ErrorKind::Contract, "invalid distance d(" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            if (v != d_[j * n_ + i]) {
                fail(ErrorKind::Contract, "distance matrix not symmetric at (" + std::to_string(i) + ", " +
                                              std::to_string(j) + ")");
            }
        }
    }
}

DistanceMatrix distance_matrix(const PointCloud& cloud) {
    if (cloud.size() == 0) fail(ErrorKind::Contract, "invalid cloud: no points");
    if (!cloud.all_finite()) fail(ErrorKind::Contract, "invalid cloud: non-finite coordinate");
    const std::size_t n = cloud.size();
    std::vector<double> d(n * n);
    kernels::pairwise_distances(cloud.coords(), n, cloud.dim(), d);
    return DistanceMatrix(n, std::move(d));
}

double enclosing_radius(const DistanceMatrix& d) {
    const std::size_t n = d.size();
    double best = n ? std::numeric_limits<double>::infinity() : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double mx = 0.0;
        for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, d(i, j));
        best = std::min(best, mx);
    }
    return best;
}

namespace {

struct Edge {
    double value;
    std::uint32_t i;
    std::uint32_t j;  // i < j
};

bool edge_less(const Edge& a, const Edge& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
}

/// Edges with value <= threshold in filtration order.
std::vector<Edge> sorted_edges(const DistanceMatrix& d, double threshold) {
    std::vector<Edge> edges;
    const auto n = static_cast<std::uint32_t>(d.size());
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            if (d(i, j) <= threshold) edges.push_back({d(i, j), i, j});
        }
    }
    std::sort(edges.begin(), edges.end(), edge_less);
    return edges;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Merges the classes of a and b. The root with the smaller index (the
    /// elder) survives. Returns false if they were already joined.
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

/// Marks the edges that merge two components (the H0 deaths).
std::vector<char> kruskal(std::size_t n, const std::vector<Edge>& edges) {
    UnionFind uf(n);
    std::vector<char> tree(edges.size(), 0);
    std::size_t merges = 0;
    for (std::size_t e = 0; e < edges.size() && merges + 1 < n; ++e) {
        if (uf.unite(edges[e].i, edges[e].j)) {
            tree[e] = 1;
            ++merges;
        }
    }
    return tree;
}

struct Triangle {
    double diam;
    std::uint64_t lex;  // a*n*n + b*n + c for a < b < c

    friend bool operator==(const Triangle& x, const Triangle& y) { return x.lex == y.lex; }
};

// Min-heap order on (diameter, vertex tuple).
struct TriangleAfter {
    bool operator()(const Triangle& x, const Triangle& y) const {
        if (x.diam != y.diam) return x.diam > y.diam;
        return x.lex > y.lex;
    }
};

bool triangle_less(const Triangle& x, const Triangle& y) { return TriangleAfter{}(y, x); }

class CoboundaryReducer {
public:
    CoboundaryReducer(const DistanceMatrix& d, double threshold, const std::vector<Edge>& edges)
        : d_(d), n_(d.size()), threshold_(threshold), edges_(edges), basis_(edges.size()) {}

    void append_coboundary(std::uint32_t e, std::vector<Triangle>& out) const {
        const auto [value, i, j] = edges_[e];
        for (std::uint32_t k = 0; k < n_; ++k) {
            if (k == i || k == j) continue;
            const double dik = d_(i, k);
            const double djk = d_(j, k);
            if (dik > threshold_ || djk > threshold_) continue;
            std::uint64_t a = i, b = j, c = k;
            if (c < a) std::swap(a, c), std::swap(b, c);
            else if (c < b) std::swap(b, c);
            out.push_back({std::max(value, std::max(dik, djk)), (a * n_ + b) * n_ + c});
        }
    }

    /// Reduces the column of edge e; returns its pivot triangle if nonzero.
    std::optional<Triangle> reduce(std::uint32_t e) {
        scratch_.clear();
        append_coboundary(e, scratch_);
        if (scratch_.empty()) return std::nullopt;
        const Triangle first = *std::min_element(scratch_.begin(), scratch_.end(), triangle_less);
        auto owner = pivots_.find(first.lex);
        if (owner == pivots_.end()) {
            pivots_.emplace(first.lex, e);
            basis_[e] = {e};
            return first;
        }

        std::priority_queue<Triangle, std::vector<Triangle>, TriangleAfter> heap(TriangleAfter{}, scratch_);
        std::vector<std::uint32_t> combination{e};
        while (true) {
            const std::optional<Triangle> pivot = pop_pivot(heap);
            if (!pivot) return std::nullopt;
            owner = pivots_.find(pivot->lex);
            if (owner == pivots_.end()) {
                std::sort(combination.begin(), combination.end());
                basis_[e] = cancel_pairs(combination);
                pivots_.emplace(pivot->lex, e);
                return pivot;
            }
            for (std::uint32_t f : basis_[owner->second]) {
                combination.push_back(f);
                scratch_.clear();
                append_coboundary(f, scratch_);
                for (const auto& t : scratch_) heap.push(t);
            }
        }
    }

private:
    using Heap = std::priority_queue<Triangle, std::vector<Triangle>, TriangleAfter>;

    // Smallest triangle with odd multiplicity; it is left on the heap.
    static std::optional<Triangle> pop_pivot(Heap& heap) {
        while (!heap.empty()) {
            const Triangle top = heap.top();
            heap.pop();
            if (!heap.empty() && heap.top() == top) {
                heap.pop();
                continue;
            }
            heap.push(top);
            return top;
        }
        return std::nullopt;
    }

    static std::vector<std::uint32_t> cancel_pairs(const std::vector<std::uint32_t>& sorted) {
        std::vector<std::uint32_t> out;
        for (std::size_t k = 0; k < sorted.size();) {
            std::size_t run = k;
            while (run < sorted.size() && sorted[run] == sorted[k]) ++run;
            if ((run - k) % 2 == 1) out.push_back(sorted[k]);
            k = run;
        }
        return out;
    }

    const DistanceMatrix& d_;
    std::uint64_t n_;
    double threshold_;
    const std::vector<Edge>& edges_;
    std::vector<std::vector<std::uint32_t>> basis_;
    std::unordered_map<std::uint64_t, std::uint32_t> pivots_;
    std::vector<Triangle> scratch_;
};

}  // namespace

H0Result rips_h0(const DistanceMatrix& d) {
    H0Result out;
    if (d.size() == 0) return out;
    const auto edges = sorted_edges(d, std::numeric_limits<double>::infinity());
    const auto tree = kruskal(d.size(), edges);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (tree[e] && edges[e].value > 0.0) out.bars.push_back({0.0, edges[e].value});
    }
    out.essential = 1;
    return out;
}

std::vector<Bar> rips_h1(const DistanceMatrix& d, std::optional<double> threshold) {
    const double thr = threshold.value_or(enclosing_radius(d));
    if (!(thr >= 0.0)) fail(ErrorKind::Contract, "invalid threshold " + csv::format(thr) + " (must be >= 0)");
    std::vector<Bar> bars;
    if (d.size() < 3) return bars;
    const auto edges = sorted_edges(d, thr);
    const auto tree = kruskal(d.size(), edges);
    CoboundaryReducer reducer(d, thr, edges);
    for (std::size_t e = edges.size(); e-- > 0;) {
        if (tree[e]) continue;
        const auto pivot = reducer.reduce(static_cast<std::uint32_t>(e));
        if (pivot && pivot->diam > edges[e].value) bars.push_back({edges[e].value, pivot->diam});
    }
    std::sort(bars.begin(), bars.end());
    return bars;
}

PersistenceDiagram rips_diagram(const DistanceMatrix& d, std::optional<double> threshold) {
    PersistenceDiagram out;
    auto h0 = rips_h0(d);
    out.h0_bars = std::move(h0.bars);
    out.h0_essential_count = h0.essential;
    out.h1_bars = rips_h1(d, threshold);
    return out;
}

DiagramStats diagram_stats(const PersistenceDiagram& diagram) {
    DiagramStats s;
    for (const auto& b : diagram.h0_bars) {
        s.h0_max = std::max(s.h0_max, b.persistence());
        s.h0_total += b.persistence();
    }
    for (const auto& b : diagram.h1_bars) {
        s.h1_max = std::max(s.h1_max, b.persistence());
        s.h1_total += b.persistence();
    }
    return s;
}

void write_diagram_csv(const std::filesystem::path& path, const PersistenceDiagram& diagram) {
    csv::Table table;
    table.header = {"degree", "birth", "death"};
    for (const auto& b : diagram.h0_bars) table.rows.push_back({"0", csv::format(b.birth), csv::format(b.death)});
    for (int k = 0; k < diagram.h0_essential_count; ++k) table.rows.push_back({"0", "0", "inf"});
    for (const auto& b : diagram.h1_bars) table.rows.push_back({"1", csv::format(b.birth), csv::format(b.death)});
    csv::write(path, table);
}

PersistenceDiagram read_diagram_csv(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    const auto deg = table.column("degree");
    const auto birth = table.column("birth");
    const auto death = table.column("death");
    PersistenceDiagram out;
    for (const auto& row : table.rows) {
        const Bar b{csv::parse(row[birth]), csv::parse(row[death])};
        if (row[deg] == "0") {
            if (std::isinf(b.death)) {
                ++out.h0_essential_count;
            } else {
                out.h0_bars.push_back(b);
            }
        } else if (row[deg] == "1") {
            out.h1_bars.push_back(b);
        } else {
            fail(ErrorKind::Io, path.string() + ": unsupported degree " + row[deg]);
        }
    }
    return out;
}

}  // namespace groktopo
