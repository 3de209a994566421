#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace groktopo {

/// Where the rows of a cloud came from.
struct CloudSource {
    enum class Kind { TokenEmbedding, TransformerLayer, MlpLayer };

    Kind kind = Kind::TokenEmbedding;
    int layer = 0;     // 1-based; 0 for the token embedding
    int position = 1;  // transformer token position; -1 selects both positions

    static CloudSource embedding() { return {}; }
    static CloudSource transformer(int layer, int position) { return {Kind::TransformerLayer, layer, position}; }
    static CloudSource mlp(int layer) { return {Kind::MlpLayer, layer, 0}; }

    /// "token-embedding", "transformer-layer-2-position-1", "mlp-layer-2", ...
    std::string str() const;

    friend bool operator==(const CloudSource&, const CloudSource&) = default;
};

struct Provenance {
    std::string run_id;
    std::int64_t step = 0;
    CloudSource source;
    bool normalized = false;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// n points in R^dim, row-major, double precision.
class PointCloud {
public:
    PointCloud() = default;
    PointCloud(std::size_t n, std::size_t dim, std::vector<double> coords, Provenance provenance = {});

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> coords() const { return coords_; }
    std::span<double> coords() { return coords_; }
    std::span<const double> row(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

    const Provenance& provenance() const { return provenance_; }
    Provenance& provenance() { return provenance_; }

    bool all_finite() const;

    /// Cloud made of the given rows, in the given order.
    PointCloud select(std::span<const std::size_t> rows) const;

    friend bool operator==(const PointCloud&, const PointCloud&) = default;

private:
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> coords_;
    Provenance provenance_;
};

}  // namespace groktopo
