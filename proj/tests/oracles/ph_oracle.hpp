#pragma once

// Brute-force references for the PH engine. Everything here is written
// against first principles on purpose-built data structures: the full
// simplicial complex up to dimension 2 is enumerated, sorted by
// (value, dimension, vertex tuple), and the boundary matrix is reduced over
// GF(2) with the textbook column algorithm.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

struct Bar {
    double birth;
    double death;
    friend auto operator<=>(const Bar&, const Bar&) = default;
};

struct Diagram {
    std::vector<Bar> h0;  // finite bars with positive persistence
    int h0_essential = 0;
    std::vector<Bar> h1;  // finite bars with positive persistence
    int h1_essential = 0;
};

// dist is row-major n x n.
inline Diagram homology(const std::vector<double>& dist, std::size_t n) {
    struct Simplex {
        double value;
        int dim;
        std::vector<std::size_t> v;
    };
    auto d = [&](std::size_t a, std::size_t b) { return dist[a * n + b]; };
    std::vector<Simplex> cx;
    for (std::size_t a = 0; a < n; ++a) cx.push_back({0.0, 0, {a}});
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) cx.push_back({d(a, b), 1, {a, b}});
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c)
                cx.push_back({std::max({d(a, b), d(a, c), d(b, c)}), 2, {a, b, c}});
    std::sort(cx.begin(), cx.end(), [](const Simplex& x, const Simplex& y) {
        if (x.value != y.value) return x.value < y.value;
        if (x.dim != y.dim) return x.dim < y.dim;
        return x.v < y.v;
    });
    auto index_of = [&](const std::vector<std::size_t>& v) {
        for (std::size_t i = 0; i < cx.size(); ++i)
            if (cx[i].v == v) return i;
        return std::numeric_limits<std::size_t>::max();
    };
    // Columns as sorted index lists.
    std::vector<std::vector<std::size_t>> col(cx.size());
    for (std::size_t s = 0; s < cx.size(); ++s) {
        const auto& v = cx[s].v;
        if (v.size() < 2) continue;
        for (std::size_t drop = 0; drop < v.size(); ++drop) {
            std::vector<std::size_t> face;
            for (std::size_t t = 0; t < v.size(); ++t)
                if (t != drop) face.push_back(v[t]);
            col[s].push_back(index_of(face));
        }
        std::sort(col[s].begin(), col[s].end());
    }
    const std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> low_owner(cx.size(), none);
    std::vector<std::size_t> paired_with(cx.size(), none);
    for (std::size_t s = 0; s < cx.size(); ++s) {
        while (!col[s].empty() && low_owner[col[s].back()] != none) {
            const auto& other = col[low_owner[col[s].back()]];
            std::vector<std::size_t> sum;
            std::set_symmetric_difference(col[s].begin(), col[s].end(), other.begin(), other.end(),
                                          std::back_inserter(sum));
            col[s] = std::move(sum);
        }
        if (!col[s].empty()) {
            low_owner[col[s].back()] = s;
            paired_with[col[s].back()] = s;
            paired_with[s] = col[s].back();
        }
    }
    Diagram out;
    for (std::size_t s = 0; s < cx.size(); ++s) {
        const int dim = cx[s].dim;
        if (dim == 2) continue;
        if (paired_with[s] == none) {
            (dim == 0 ? out.h0_essential : out.h1_essential) += 1;
        } else if (paired_with[s] > s) {
            const Bar b{cx[s].value, cx[paired_with[s]].value};
            if (b.death > b.birth) (dim == 0 ? out.h0 : out.h1).push_back(b);
        }
    }
    std::sort(out.h0.begin(), out.h0.end());
    std::sort(out.h1.begin(), out.h1.end());
    return out;
}

// Prim's algorithm on the complete graph; returns sorted edge weights.
inline std::vector<double> mst_weights(const std::vector<double>& dist, std::size_t n) {
    std::vector<double> out;
    if (n == 0) return out;
    std::vector<char> in_tree(n, 0);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    best[0] = 0.0;
    for (std::size_t it = 0; it < n; ++it) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!in_tree[v] && (u == n || best[v] < best[u])) u = v;
        in_tree[u] = 1;
        if (it > 0) out.push_back(best[u]);
        for (std::size_t v = 0; v < n; ++v)
            if (!in_tree[v]) best[v] = std::min(best[v], dist[u * n + v]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace oracle
