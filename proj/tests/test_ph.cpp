#include <doctest.h>

#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <vector>

#include "groktopo/error.hpp"
#include "groktopo/ph.hpp"
#include "groktopo/rng.hpp"
#include "oracles/ph_oracle.hpp"

using namespace groktopo;

namespace {

PointCloud random_cloud(std::size_t n, std::size_t dim, Rng& rng) {
    std::vector<double> x(n * dim);
    for (auto& v : x) v = rng.uniform();
    return PointCloud(n, dim, std::move(x));
}

PointCloud cloud_of(std::size_t dim, std::vector<double> coords) {
    const std::size_t n = coords.size() / dim;
    return PointCloud(n, dim, std::move(coords));
}

std::vector<double> naive_distances(const PointCloud& c) {
    const std::size_t n = c.size();
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::size_t t = 0; t < c.dim(); ++t) s += (c.row(i)[t] - c.row(j)[t]) * (c.row(i)[t] - c.row(j)[t]);
            d[i * n + j] = std::sqrt(s);
        }
    }
    return d;
}

void check_bars_close(const std::vector<Bar>& got, const std::vector<oracle::Bar>& want, double tol = 1e-12) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(std::abs(got[i].birth - want[i].birth) <= tol);
        CHECK(std::abs(got[i].death - want[i].death) <= tol);
    }
}

void check_bars_close(const std::vector<Bar>& got, const std::vector<Bar>& want, double tol) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(std::abs(got[i].birth - want[i].birth) <= tol);
        CHECK(std::abs(got[i].death - want[i].death) <= tol);
    }
}

// Random orthogonal matrix by Gram-Schmidt on Gaussian columns.
std::vector<double> random_rotation(std::size_t dim, Rng& rng) {
    std::vector<double> q(dim * dim);
    for (auto& v : q) v = rng.normal();
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t prev = 0; prev < c; ++prev) {
            double dot = 0;
            for (std::size_t r = 0; r < dim; ++r) dot += q[r * dim + c] * q[r * dim + prev];
            for (std::size_t r = 0; r < dim; ++r) q[r * dim + c] -= dot * q[r * dim + prev];
        }
        double norm = 0;
        for (std::size_t r = 0; r < dim; ++r) norm += q[r * dim + c] * q[r * dim + c];
        norm = std::sqrt(norm);
        for (std::size_t r = 0; r < dim; ++r) q[r * dim + c] /= norm;
    }
    return q;
}

}  // namespace

TEST_CASE("distance matrix") {
    const auto d = distance_matrix(cloud_of(2, {0, 0, 3, 4}));
    CHECK(d(0, 1) == 5.0);
    CHECK(d(1, 0) == 5.0);
    CHECK(distance_matrix(cloud_of(3, {1, 2, 3})).values().size() == 1);
    CHECK(distance_matrix(cloud_of(3, {1, 2, 3}))(0, 0) == 0.0);

    Rng rng(11);
    const auto c = random_cloud(10, 4, rng);
    const auto fast = distance_matrix(c);
    const auto slow = naive_distances(c);
    for (std::size_t i = 0; i < slow.size(); ++i) CHECK(std::abs(fast.values()[i] - slow[i]) < 1e-12);

    CHECK_THROWS_AS(distance_matrix(cloud_of(2, {0, 0, NAN, 1})), Error);
    CHECK_THROWS_AS(distance_matrix(PointCloud()), Error);
    CHECK_THROWS_AS(DistanceMatrix(2, {0, 1, 2, 0}), Error);
    CHECK_THROWS_AS(DistanceMatrix(2, {1, 1, 1, 0}), Error);
}

TEST_CASE("enclosing radius") {
    const auto square = distance_matrix(cloud_of(2, {0, 0, 1, 0, 1, 1, 0, 1}));
    CHECK(enclosing_radius(square) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(enclosing_radius(distance_matrix(cloud_of(1, {0, 1, 3}))) == 2.0);

    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = distance_matrix(random_cloud(15, 3, rng));
        double want = INFINITY;
        for (std::size_t i = 0; i < 15; ++i) {
            double mx = 0;
            for (std::size_t j = 0; j < 15; ++j) mx = std::max(mx, d(i, j));
            want = std::min(want, mx);
        }
        CHECK(enclosing_radius(d) == want);
    }
}

TEST_CASE("H0 examples") {
    auto h0 = rips_h0(distance_matrix(cloud_of(1, {0, 1})));
    REQUIRE(h0.bars.size() == 1);
    CHECK(h0.bars[0] == Bar{0, 1});
    CHECK(h0.essential == 1);

    const double s = 2.0;
    h0 = rips_h0(distance_matrix(cloud_of(2, {0, 0, s, 0, s / 2, s * std::sqrt(3.0) / 2})));
    REQUIRE(h0.bars.size() == 2);
    CHECK(h0.bars[0].death == doctest::Approx(s).epsilon(1e-15));
    CHECK(h0.bars[1].death == doctest::Approx(s).epsilon(1e-15));

    h0 = rips_h0(distance_matrix(cloud_of(1, {0, 1, 3})));
    CHECK(h0.bars == std::vector<Bar>{{0, 1}, {0, 2}});
}

TEST_CASE("H0 deaths are the MST edge weights") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(120);
        const auto d = distance_matrix(random_cloud(n, 1 + rng.uniform_int(6), rng));
        const auto want = oracle::mst_weights(std::vector<double>(d.values().begin(), d.values().end()), n);
        const auto h0 = rips_h0(d);
        REQUIRE(h0.bars.size() == want.size());
        CHECK(h0.bars.size() + static_cast<std::size_t>(h0.essential) == n);
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(h0.bars[i].death - want[i]) <= 1e-12);
    }
}

TEST_CASE("H1 analytic bars") {
    const auto square = distance_matrix(cloud_of(2, {0, 0, 1, 0, 1, 1, 0, 1}));
    const auto sq = rips_h1(square);
    REQUIRE(sq.size() == 1);
    CHECK(std::abs(sq[0].birth - 1.0) <= 1e-12);
    CHECK(std::abs(sq[0].death - std::sqrt(2.0)) <= 1e-12);

    const auto tri = distance_matrix(cloud_of(2, {0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2}));
    CHECK(rips_h1(tri).empty());

    // Both agree with the reference reduction.
    const auto o = oracle::homology(std::vector<double>(square.values().begin(), square.values().end()), 4);
    check_bars_close(sq, o.h1);
    CHECK(oracle::homology(std::vector<double>(tri.values().begin(), tri.values().end()), 3).h1.empty());

    const auto stats = diagram_stats(rips_diagram(square));
    CHECK(stats.h1_max == doctest::Approx(std::sqrt(2.0) - 1));
    CHECK(stats.h1_total == doctest::Approx(std::sqrt(2.0) - 1));
    CHECK(stats.h0_max == 1.0);
    CHECK(stats.h0_total == 3.0);

    CHECK_THROWS_AS(rips_h1(square, -1.0), Error);
    CHECK(rips_h1(distance_matrix(cloud_of(1, {0, 1}))).empty());
}

TEST_CASE("empty diagram statistics are zero") {
    const auto s = diagram_stats(PersistenceDiagram{});
    CHECK(s.h0_max == 0);
    CHECK(s.h0_total == 0);
    CHECK(s.h1_max == 0);
    CHECK(s.h1_total == 0);
}

TEST_CASE("engine equals the brute-force reduction on random clouds") {
    Rng rng(1234);
    int with_h1 = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 6 + rng.uniform_int(7);
        const std::size_t dim = std::array<std::size_t, 3>{2, 3, 8}[rng.uniform_int(3)];
        const auto d = distance_matrix(random_cloud(n, dim, rng));
        const auto o = oracle::homology(std::vector<double>(d.values().begin(), d.values().end()), n);
        const auto dg = rips_diagram(d);
        check_bars_close(dg.h0_bars, o.h0);
        check_bars_close(dg.h1_bars, o.h1);
        CHECK(dg.h0_essential_count == o.h0_essential);
        with_h1 += dg.h1_bars.empty() ? 0 : 1;
    }
    CHECK(with_h1 > 10);
}

TEST_CASE("ties are handled like the full reduction") {
    // Integer grid points produce many equal distances.
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 6 + rng.uniform_int(6);
        std::vector<double> x(n * 2);
        for (auto& v : x) v = static_cast<double>(rng.uniform_int(4));
        // keep points distinct
        auto c = cloud_of(2, x);
        bool distinct = true;
        for (std::size_t i = 0; i < n && distinct; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (c.row(i)[0] == c.row(j)[0] && c.row(i)[1] == c.row(j)[1]) distinct = false;
        if (!distinct) continue;
        const auto d = distance_matrix(c);
        const auto o = oracle::homology(std::vector<double>(d.values().begin(), d.values().end()), n);
        check_bars_close(rips_h1(d), o.h1);
        check_bars_close(rips_h0(d).bars, o.h0);
    }
}

TEST_CASE("truncation at the enclosing radius loses no finite H1 bars") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = distance_matrix(random_cloud(14, 2, rng));
        const auto at_radius = rips_h1(d);
        check_bars_close(at_radius, rips_h1(d, 1e9), 0.0);
        for (const auto& b : at_radius) CHECK(b.death <= enclosing_radius(d));
    }
}

TEST_CASE("isometry, scale and permutation invariance") {
    Rng rng(4242);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 40;
        const std::size_t dim = 3;
        const auto c = random_cloud(n, dim, rng);
        const auto base = rips_diagram(distance_matrix(c));

        const auto q = random_rotation(dim, rng);
        std::vector<double> moved(n * dim);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < dim; ++r) {
                double s = 5.0 + static_cast<double>(r);
                for (std::size_t k = 0; k < dim; ++k) s += q[r * dim + k] * c.row(i)[k];
                moved[i * dim + r] = s;
            }
        }
        const auto rot = rips_diagram(distance_matrix(cloud_of(dim, moved)));
        check_bars_close(rot.h0_bars, base.h0_bars, 1e-9);
        check_bars_close(rot.h1_bars, base.h1_bars, 1e-9);

        const double scale = 3.7;
        std::vector<double> scaled(c.coords().begin(), c.coords().end());
        for (auto& v : scaled) v *= scale;
        const auto sc = rips_diagram(distance_matrix(cloud_of(dim, scaled)));
        REQUIRE(sc.h1_bars.size() == base.h1_bars.size());
        for (std::size_t i = 0; i < sc.h1_bars.size(); ++i) {
            CHECK(sc.h1_bars[i].birth == doctest::Approx(scale * base.h1_bars[i].birth).epsilon(1e-12));
            CHECK(sc.h1_bars[i].death == doctest::Approx(scale * base.h1_bars[i].death).epsilon(1e-12));
        }

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(perm));
        const auto pd = rips_diagram(distance_matrix(c.select(perm)));
        check_bars_close(pd.h0_bars, base.h0_bars, 1e-12);
        check_bars_close(pd.h1_bars, base.h1_bars, 1e-12);
    }
}

// Moving every point by at most delta moves every distance, hence every bar
// endpoint, by at most 2 delta; a persistence can then move by 4 delta.
TEST_CASE("h1_max is stable under small perturbations") {
    Rng rng(8);
    const double delta = 1e-3;
    for (int trial = 0; trial < 10; ++trial) {
        const auto c = random_cloud(30, 2, rng);
        std::vector<double> x(c.coords().begin(), c.coords().end());
        for (std::size_t i = 0; i < 30; ++i) {
            const double angle = 2 * std::numbers::pi * rng.uniform();
            const double r = delta * rng.uniform();
            x[2 * i] += r * std::cos(angle);
            x[2 * i + 1] += r * std::sin(angle);
        }
        const double before = diagram_stats(rips_diagram(distance_matrix(c))).h1_max;
        const double after = diagram_stats(rips_diagram(distance_matrix(cloud_of(2, x)))).h1_max;
        CHECK(std::abs(before - after) <= 4 * delta + 1e-12);
    }
}

TEST_CASE("diagram CSV round trip") {
    Rng rng(3);
    const auto dg = rips_diagram(distance_matrix(random_cloud(25, 2, rng)));
    const auto path = std::filesystem::temp_directory_path() / "groktopo_test_diagram.csv";
    write_diagram_csv(path, dg);
    CHECK(read_diagram_csv(path) == dg);
    std::filesystem::remove(path);
}

TEST_CASE("a 394-point cloud finishes within the budget") {
    Rng rng(5);
    std::vector<double> x(394 * 16);
    for (auto& v : x) v = rng.normal();
    const auto d = distance_matrix(cloud_of(16, x));
    const auto t0 = std::chrono::steady_clock::now();
    const auto dg = rips_diagram(d);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MESSAGE("n=394 diagram: " << dg.h1_bars.size() << " H1 bars in " << secs << " s");
    CHECK(dg.h0_bars.size() == 393);
    CHECK(secs < 10.0);
}
