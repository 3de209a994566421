#include "groktopo/cloud.hpp"

#include <cmath>

#include "groktopo/error.hpp"

namespace groktopo {

std::string CloudSource::str() const {
    switch (kind) {
        case Kind::TokenEmbedding:
            return "token-embedding";
        case Kind::TransformerLayer:
            return "transformer-layer-" + std::to_string(layer) +
                   (position < 0 ? std::string("-both-positions") : "-position-" + std::to_string(position));
        case Kind::MlpLayer:
            return "mlp-layer-" + std::to_string(layer);
    }
    return "unknown";
}

PointCloud::PointCloud(std::size_t n, std::size_t dim, std::vector<double> coords, Provenance provenance)
    : n_(n), dim_(dim), coords_(std::move(coords)), provenance_(std::move(provenance)) {
    if (coords_.size() != n_ * dim_) {
        fail(ErrorKind::Shape, "point cloud of " + std::to_string(n_) + " x " + std::to_string(dim_) + " given " +
                                   std::to_string(coords_.size()) + " coordinates");
    }
}

bool PointCloud::all_finite() const {
    for (double v : coords_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

PointCloud PointCloud::select(std::span<const std::size_t> rows) const {
    std::vector<double> out;
    out.reserve(rows.size() * dim_);
    for (auto r : rows) {
        if (r >= n_) fail(ErrorKind::Index, "row " + std::to_string(r) + " out of range for cloud of " + std::to_string(n_));
        const auto src = row(r);
        out.insert(out.end(), src.begin(), src.end());
    }
    return PointCloud(rows.size(), dim_, std::move(out), provenance_);
}

}  // namespace groktopo
