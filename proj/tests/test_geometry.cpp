#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "groktopo/error.hpp"
#include "groktopo/geometry.hpp"
#include "groktopo/rng.hpp"

using namespace groktopo;

namespace {

PointCloud cube(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n * dim);
    for (auto& v : x) v = rng.uniform();
    return PointCloud(n, dim, std::move(x));
}

double mean_norm(const PointCloud& c) {
    double s = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double q = 0;
        for (double v : c.row(i)) q += v * v;
        s += std::sqrt(q);
    }
    return s / static_cast<double>(c.size());
}

double mean_vector_norm(const PointCloud& c) {
    std::vector<double> m(c.dim(), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t k = 0; k < c.dim(); ++k) m[k] += c.row(i)[k];
    double q = 0;
    for (double v : m) q += (v / static_cast<double>(c.size())) * (v / static_cast<double>(c.size()));
    return std::sqrt(q);
}

CheckpointRecord fake_checkpoint() {
    CheckpointRecord ck;
    ck.step = 1500;
    Tensor emb({5, 3});
    for (std::size_t i = 0; i < emb.numel(); ++i) emb[i] = static_cast<float>(i);
    ck.params.tensors.push_back({"tok_emb", emb, true});
    CapturedStates st;
    st.embedding = emb;
    Tensor block({4, 2, 3});
    for (std::size_t i = 0; i < block.numel(); ++i) block[i] = static_cast<float>(100 + i);
    st.layers = {block, block};
    ck.states = st;
    return ck;
}

}  // namespace

TEST_CASE("extract_cloud shapes and provenance") {
    const auto ck = fake_checkpoint();
    const auto emb = extract_cloud(ck, CloudSource::embedding(), "run-a");
    CHECK(emb.size() == 5);
    CHECK(emb.dim() == 3);
    CHECK(emb.row(4)[2] == 14.0);
    CHECK(emb.provenance().run_id == "run-a");
    CHECK(emb.provenance().step == 1500);
    CHECK(emb.provenance().source.str() == "token-embedding");
    CHECK_FALSE(emb.provenance().normalized);

    const auto pos1 = extract_cloud(ck, CloudSource::transformer(2, 1));
    CHECK(pos1.size() == 4);
    CHECK(pos1.row(0)[0] == 103.0);
    CHECK(pos1.row(1)[0] == 109.0);
    CHECK(pos1.provenance().source.str() == "transformer-layer-2-position-1");

    const auto both = extract_cloud(ck, CloudSource::transformer(2, -1));
    CHECK(both.size() == 8);
    CHECK(both.row(0)[0] == 100.0);
    CHECK(both.row(4)[0] == 103.0);

    CHECK_THROWS_AS(extract_cloud(ck, CloudSource::transformer(3, 1)), Error);
    CHECK_THROWS_AS(extract_cloud(ck, CloudSource::mlp(1)), Error);
    auto bare = ck;
    bare.states.reset();
    CHECK_THROWS_AS(extract_cloud(bare, CloudSource::transformer(1, 1)), Error);
    CHECK(extract_cloud(bare, CloudSource::embedding()).size() == 5);
}

TEST_CASE("normalize_cloud") {
    const auto pair = normalize_cloud(PointCloud(2, 2, {0, 0, 2, 0}));
    CHECK(pair.row(0)[0] == -1.0);
    CHECK(pair.row(1)[0] == 1.0);
    CHECK(pair.row(0)[1] == 0.0);
    CHECK(pair.provenance().normalized);

    const auto fixed = PointCloud(2, 2, {-1, 0, 1, 0});
    CHECK(normalize_cloud(fixed).coords()[0] == doctest::Approx(-1.0).epsilon(1e-12));

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        std::vector<double> x(50 * 7);
        for (auto& v : x) v = 10.0 * rng.normal() + 3.0;
        const auto once = normalize_cloud(PointCloud(50, 7, x));
        CHECK(mean_vector_norm(once) < 1e-10);
        CHECK(std::abs(mean_norm(once) - 1.0) < 1e-10);
        const auto twice = normalize_cloud(once);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(twice.coords()[i] - once.coords()[i]) < 1e-12);
    }

    CHECK_THROWS_AS(normalize_cloud(PointCloud(3, 1, {2, 2, 2})), Error);
    CHECK_THROWS_AS(normalize_cloud(PointCloud(1, 1, {2})), Error);
}

TEST_CASE("subsample") {
    const auto small = cube(500, 3, 1);
    CHECK(subsample(small, 2000, 9) == small);

    const auto big = cube(10000, 2, 2);
    const auto a = subsample(big, 2000, 9);
    CHECK(a.size() == 2000);
    CHECK(a == subsample(big, 2000, 9));
    CHECK_FALSE(a == subsample(big, 2000, 10));
    std::set<std::pair<double, double>> rows;
    for (std::size_t i = 0; i < big.size(); ++i) rows.insert({big.row(i)[0], big.row(i)[1]});
    std::set<std::pair<double, double>> picked;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(rows.count({a.row(i)[0], a.row(i)[1]}) == 1);
        picked.insert({a.row(i)[0], a.row(i)[1]});
    }
    CHECK(picked.size() == 2000);
    CHECK_THROWS_AS(subsample(big, 0, 1), Error);
}

TEST_CASE("deduplicate keeps first occurrences") {
    const PointCloud c(5, 2, {0, 0, 1, 1, 0, 0, 2, 2, 1, 1});
    const auto d = deduplicate(c);
    CHECK(d.size() == 3);
    CHECK(d.row(2)[0] == 2.0);
}

TEST_CASE("TwoNN estimator on synthetic ratios") {
    CHECK(twonn_mle(std::vector<double>(64, std::numbers::e)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(twonn_mle({std::exp(0.5), std::exp(0.5)}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(twonn_mle({1.0, 1.0}), Error);
}

TEST_CASE("pointwise LID on known manifolds") {
    SUBCASE("segment embedded in 16 dimensions") {
        Rng rng(31);
        std::vector<double> dir(16);
        for (auto& v : dir) v = rng.normal();
        std::vector<double> x(2000 * 16);
        for (std::size_t i = 0; i < 2000; ++i) {
            const double t = rng.uniform();
            for (std::size_t k = 0; k < 16; ++k) x[i * 16 + k] = t * dir[k];
        }
        const auto lid = pointwise_lid(PointCloud(2000, 16, x));
        MESSAGE("segment mean LID " << lid.mean);
        CHECK(lid.mean >= 0.8);
        CHECK(lid.mean <= 1.2);
    }
    SUBCASE("unit square") {
        const auto lid = pointwise_lid(cube(2000, 2, 32));
        MESSAGE("square mean LID " << lid.mean);
        CHECK(lid.mean >= 1.6);
        CHECK(lid.mean <= 2.4);
    }
    SUBCASE("five-dimensional cube") {
        const auto lid = pointwise_lid(cube(2000, 5, 33));
        MESSAGE("5-cube mean LID " << lid.mean);
        CHECK(lid.mean >= 4.0);
        CHECK(lid.mean <= 6.0);
        CHECK(lid.per_point.size() == 2000);
        CHECK(lid.neighborhood == 64);
        for (double v : lid.per_point) CHECK((v > 0 && std::isfinite(v)));
    }
}

TEST_CASE("LID is invariant under isometries and scaling") {
    const auto c = cube(300, 3, 5);
    const auto base = pointwise_lid(c, 20);
    std::vector<double> x(c.coords().begin(), c.coords().end());
    // Rotate the first two axes, translate and scale.
    const double th = 0.7;
    for (std::size_t i = 0; i < 300; ++i) {
        const double a = x[3 * i];
        const double b = x[3 * i + 1];
        x[3 * i] = 4.0 * (std::cos(th) * a - std::sin(th) * b) + 1.0;
        x[3 * i + 1] = 4.0 * (std::sin(th) * a + std::cos(th) * b) - 2.0;
        x[3 * i + 2] = 4.0 * x[3 * i + 2] + 0.5;
    }
    const auto moved = pointwise_lid(PointCloud(300, 3, x), 20);
    for (std::size_t i = 0; i < 300; ++i) CHECK(std::abs(moved.per_point[i] - base.per_point[i]) < 1e-9);
}

TEST_CASE("LID preconditions") {
    CHECK_THROWS_AS(pointwise_lid(cube(64, 2, 1), 64), Error);
    auto c = cube(100, 2, 1);
    std::vector<double> x(c.coords().begin(), c.coords().end());
    x[2] = x[0];
    x[3] = x[1];
    try {
        pointwise_lid(PointCloud(100, 2, x), 10);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Numerical);
        CHECK(std::string(e.what()).find("points") != std::string::npos);
    }
    CHECK_NOTHROW(pointwise_lid(deduplicate(PointCloud(100, 2, x)), 10));
}

TEST_CASE("global TwoNN on a square") {
    const double d = global_twonn(cube(2000, 2, 77));
    CHECK(d > 1.6);
    CHECK(d < 2.4);
}
