#include "groktopo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "groktopo/csv.hpp"
#include "groktopo/error.hpp"
#include "groktopo/kernels.hpp"
#include "groktopo/rng.hpp"

namespace groktopo {

namespace {

PointCloud from_tensor_rows(const Tensor& t, std::size_t rows, std::size_t dim, std::size_t stride, std::size_t offset,
                            Provenance prov) {
    std::vector<double> x(rows * dim);
    for (std::size_t r = 0; r < rows; ++r) {
        const float* src = t.data() + r * stride + offset;
        for (std::size_t c = 0; c < dim; ++c) x[r * dim + c] = src[c];
    }
    return PointCloud(rows, dim, std::move(x), std::move(prov));
}

const Tensor& state_of(const CheckpointRecord& ckpt, const CloudSource& source) {
    if (!ckpt.states) {
        fail(ErrorKind::Contract, "source not found: step " + std::to_string(ckpt.step) + " has no captured states for " +
                                      source.str());
    }
    const auto& layers = ckpt.states->layers;
    if (source.layer < 1 || static_cast<std::size_t>(source.layer) > layers.size()) {
        fail(ErrorKind::Contract, "source not found: " + source.str() + " (checkpoint has " +
                                      std::to_string(layers.size()) + " layers)");
    }
    return layers[static_cast<std::size_t>(source.layer - 1)];
}

}  // namespace

PointCloud extract_cloud(const CheckpointRecord& ckpt, const CloudSource& source, const std::string& run_id) {
    const Provenance prov{run_id, ckpt.step, source, false};
    switch (source.kind) {
        case CloudSource::Kind::TokenEmbedding: {
            const Tensor& emb = ckpt.params.at("tok_emb");
            return from_tensor_rows(emb, emb.rows(), emb.cols(), emb.cols(), 0, prov);
        }
        case CloudSource::Kind::MlpLayer: {
            const Tensor& s = state_of(ckpt, source);
            if (s.rank() != 2) fail(ErrorKind::Contract, "source not found: " + source.str() + " is not an MLP state");
            return from_tensor_rows(s, s.rows(), s.cols(), s.cols(), 0, prov);
        }
        case CloudSource::Kind::TransformerLayer: {
            const Tensor& s = state_of(ckpt, source);
            if (s.rank() != 3) {
                fail(ErrorKind::Contract, "source not found: " + source.str() + " is not a transformer state");
            }
            const auto t = static_cast<std::size_t>(s.dim(0));
            const auto seq = static_cast<std::size_t>(s.dim(1));
            const auto d = static_cast<std::size_t>(s.dim(2));
            if (source.position >= 0) {
                if (static_cast<std::size_t>(source.position) >= seq) {
                    fail(ErrorKind::Contract, "source not found: position " + std::to_string(source.position));
                }
                return from_tensor_rows(s, t, d, seq * d, static_cast<std::size_t>(source.position) * d, prov);
            }
            std::vector<double> x;
            x.reserve(seq * t * d);
            for (std::size_t q = 0; q < seq; ++q) {
                const auto part = from_tensor_rows(s, t, d, seq * d, q * d, prov);
                x.insert(x.end(), part.coords().begin(), part.coords().end());
            }
            return PointCloud(seq * t, d, std::move(x), prov);
        }
    }
    fail(ErrorKind::Contract, "unknown cloud source");
}

PointCloud normalize_cloud(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    const std::size_t dim = cloud.dim();
    if (n < 2) fail(ErrorKind::Contract, "normalize_cloud needs at least 2 points, got " + std::to_string(n));
    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < dim; ++c) mean[c] += cloud.row(i)[c];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    std::vector<double> x(n * dim);
    double norm_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double v = cloud.row(i)[c] - mean[c];
            x[i * dim + c] = v;
            sq += v * v;
        }
        norm_sum += std::sqrt(sq);
    }
    const double scale = norm_sum / static_cast<double>(n);
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        fail(ErrorKind::Numerical, "degenerate cloud: all points identical (" + cloud.provenance().source.str() + ")");
    }
    for (auto& v : x) v /= scale;
    Provenance prov = cloud.provenance();
    prov.normalized = true;
    return PointCloud(n, dim, std::move(x), std::move(prov));
}

PointCloud subsample(const PointCloud& cloud, std::size_t n_max, std::uint64_t seed) {
    if (n_max == 0) fail(ErrorKind::Config, "subsample: n_max must be >= 1");
    const std::size_t n = cloud.size();
    if (n <= n_max) return cloud;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto rng = Rng::stream(seed, streams::kSubsample);
    for (std::size_t i = 0; i < n_max; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_int(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n_max);
    std::sort(idx.begin(), idx.end());
    return cloud.select(idx);
}

PointCloud deduplicate(const PointCloud& cloud) {
    std::set<std::vector<double>> seen;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto r = cloud.row(i);
        if (seen.emplace(r.begin(), r.end()).second) keep.push_back(i);
    }
    if (keep.size() == cloud.size()) return cloud;
    return cloud.select(keep);
}

double twonn_mle(const std::vector<double>& mu) {
    double s = 0.0;
    for (double m : mu) s += std::log(m);
    if (!(s > 0.0) || !std::isfinite(s)) {
        fail(ErrorKind::Numerical, "TwoNN: sum of log ratios is " + csv::format(s) + " over " +
                                       std::to_string(mu.size()) + " ratios");
    }
    return static_cast<double>(mu.size()) / s;
}

namespace {

[[noreturn]] void zero_distance(std::size_t i, std::size_t j) {
    fail(ErrorKind::Numerical, "TwoNN: r1 = 0 between points " + std::to_string(i) + " and " + std::to_string(j) +
                                   " (deduplicate the cloud first)");
}

}  // namespace

LidEstimate pointwise_lid(const PointCloud& cloud, int neighbors) {
    const std::size_t n = cloud.size();
    if (neighbors < 3) fail(ErrorKind::Config, "pointwise_lid: neighborhood size must be >= 3");
    const auto L = static_cast<std::size_t>(neighbors);
    if (n < L + 1) {
        fail(ErrorKind::Contract, "pointwise_lid: need at least L+1 = " + std::to_string(L + 1) + " points, got " +
                                      std::to_string(n));
    }
    if (!cloud.all_finite()) fail(ErrorKind::Numerical, "pointwise_lid: non-finite coordinate");
    std::vector<double> d(n * n);
    kernels::pairwise_distances(cloud.coords(), n, cloud.dim(), d);

    LidEstimate out;
    out.neighborhood = neighbors;
    out.per_point.assign(n, 0.0);
    // Degenerate pairs found inside the parallel loop, reported afterwards.
    std::vector<std::pair<std::size_t, std::size_t>> zero_pair(n, {n, n});
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
    {
        std::vector<std::size_t> order(n);
        std::vector<std::size_t> hood(L);
        std::vector<double> mu(L);
#pragma omp for schedule(dynamic, 32)
        for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            const double* di = d.data() + i * n;
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::swap(order[i], order.back());
            auto closer = [di](std::size_t a, std::size_t b) { return di[a] != di[b] ? di[a] < di[b] : a < b; };
            std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(L - 1), order.end() - 1, closer);
            std::copy_n(order.begin(), L, hood.begin());
            for (std::size_t a = 0; a < L; ++a) {
                const double* da = d.data() + hood[a] * n;
                double r1 = INFINITY;
                double r2 = INFINITY;
                std::size_t nearest = hood[a];
                for (std::size_t b = 0; b < L; ++b) {
                    if (b == a) continue;
                    const double v = da[hood[b]];
                    if (v < r1) {
                        r2 = r1;
                        r1 = v;
                        nearest = hood[b];
                    } else if (v < r2) {
                        r2 = v;
                    }
                }
                if (r1 == 0.0) zero_pair[i] = {hood[a], nearest};
                mu[a] = r2 / r1;
            }
            double s = 0.0;
            for (double m : mu) s += std::log(m);
            out.per_point[i] = s > 0.0 ? static_cast<double>(L) / s : INFINITY;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (zero_pair[i].first < n) zero_distance(zero_pair[i].first, zero_pair[i].second);
        if (!std::isfinite(out.per_point[i])) {
            fail(ErrorKind::Numerical, "TwoNN: degenerate neighborhood around point " + std::to_string(i));
        }
    }
    double sum = 0.0;
    for (double v : out.per_point) sum += v;
    out.mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (double v : out.per_point) var += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(var / static_cast<double>(n));
    return out;
}

double global_twonn(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    if (n < 3) fail(ErrorKind::Contract, "global_twonn: need at least 3 points");
    std::vector<double> d(n * n);
    kernels::pairwise_distances(cloud.coords(), n, cloud.dim(), d);
    std::vector<double> mu(n);
    for (std::size_t i = 0; i < n; ++i) {
        double r1 = INFINITY;
        double r2 = INFINITY;
        std::size_t nearest = i;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double v = d[i * n + j];
            if (v < r1) {
                r2 = r1;
                r1 = v;
                nearest = j;
            } else if (v < r2) {
                r2 = v;
            }
        }
        if (r1 == 0.0) zero_distance(i, nearest);
        mu[i] = r2 / r1;
    }
    return twonn_mle(mu);
}

}  // namespace groktopo
