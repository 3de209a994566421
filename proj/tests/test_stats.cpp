#include <doctest.h>

#include <cmath>
#include <tuple>
#include <vector>

#include "groktopo/error.hpp"
#include "groktopo/rng.hpp"
#include "groktopo/stats.hpp"
#include "oracles/stats_oracle.hpp"

using namespace groktopo;

namespace {

MetricSeries series(std::string name, std::vector<double> values, std::int64_t spacing = 500) {
    MetricSeries s;
    s.name = std::move(name);
    for (std::size_t i = 0; i < values.size(); ++i) s.steps.push_back(static_cast<std::int64_t>(i) * spacing);
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("average ranks") {
    CHECK(average_ranks({10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
    CHECK(average_ranks({1, 1, 1}) == std::vector<double>{2, 2, 2});
}

TEST_CASE("spearman examples") {
    std::vector<double> x{0.3, 1.2, -0.5, 2.2, 0.9, 4.0};
    std::vector<double> neg;
    std::vector<double> ex;
    for (double v : x) {
        neg.push_back(-v);
        ex.push_back(std::exp(v));
    }
    CHECK(spearman(x, x).rho == 1.0);
    CHECK(spearman(x, x).p_value == 0.0);
    CHECK(spearman(x, neg).rho == -1.0);
    CHECK(spearman(x, ex).rho == 1.0);
    CHECK_THROWS_AS(spearman(x, std::vector<double>(6, 1.0)), Error);
    CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{2, 1}), Error);

    auto a = series("a", x);
    auto b = series("b", ex, 250);
    CHECK_THROWS_AS(spearman(a, b), Error);
    b.steps = a.steps;
    CHECK(spearman(a, b).rho == 1.0);
}

TEST_CASE("spearman matches frozen scipy values") {
    struct Case {
        std::vector<double> x;
        std::vector<double> y;
        double rho;
        double p;
    };
    std::vector<Case> cases;
    auto modular = [](int n, int a, int m1, int b, int c, int m2, double rho, double p) {
        Case k{{}, {}, rho, p};
        for (int i = 0; i < n; ++i) {
            k.x.push_back((i * a) % m1);
            k.y.push_back((i * b + c) % m2);
        }
        return k;
    };
    // scipy.stats.spearmanr 1.15.3
    cases.push_back(modular(12, 37, 101, 53, 11, 17, -0.027972027972027972, 0.9312343512018808));
    cases.push_back(modular(40, 29, 13, 7, 5, 41, -0.0018812975649736305, 0.9908077196820657));
    cases.push_back(modular(121, 17, 89, 61, 9, 97, 0.03626546346687385, 0.6929098586190443));
    using Frozen = std::tuple<int, double, double>;
    for (auto [n, rho, p] : {Frozen{15, 0.43487446340616587, 0.1052397245606715},
                             Frozen{60, 0.937029394529589, 3.5281684052069533e-28}}) {
        Case k{{}, {}, rho, p};
        for (int i = 0; i < n; ++i) {
            k.x.push_back((i * i) % 23 + i);
            k.y.push_back(i / 3 + i % 4);
        }
        cases.push_back(k);
    }
    for (const auto& k : cases) {
        const auto r = spearman(k.x, k.y);
        CHECK(std::abs(r.rho - k.rho) < 1e-12);
        CHECK(r.p_value == doctest::Approx(k.p).epsilon(1e-9));
    }
}

TEST_CASE("spearman matches the counting reference on random series") {
    Rng rng(2024);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 3 + rng.uniform_int(198);
        const bool ties = rng.uniform() < 0.5;
        std::vector<double> x(n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = ties ? std::floor(rng.uniform() * 8) : rng.normal();
            y[i] = ties ? std::floor(rng.uniform() * 5) : 0.5 * x[i] + rng.normal();
        }
        if (average_ranks(x) == std::vector<double>(n, (n + 1) / 2.0)) continue;
        if (average_ranks(y) == std::vector<double>(n, (n + 1) / 2.0)) continue;
        const double got = spearman(x, y).rho;
        worst = std::max(worst, std::abs(got - oracle::counting_spearman(x, y)));
        CHECK(spearman(y, x).rho == got);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("spearman is invariant under monotone maps") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(50);
        std::vector<double> y(50);
        for (auto& v : x) v = rng.normal();
        for (auto& v : y) v = rng.normal();
        std::vector<double> fx;
        for (double v : x) fx.push_back(std::atan(3 * v) + v * v * v);
        CHECK(spearman(fx, y).rho == spearman(x, y).rho);
    }
}

TEST_CASE("p-value from the t approximation") {
    CHECK(correlation_p_value(0.0, 10) == doctest::Approx(1.0));
    CHECK(correlation_p_value(1.0, 10) == 0.0);
    // Student t with 1 degree of freedom is Cauchy: p = 1 - 2/pi * atan(|t|).
    const double r = 0.6;
    const double t = r * std::sqrt(1 / (1 - r * r));
    CHECK(correlation_p_value(r, 3) == doctest::Approx(1 - 2 / M_PI * std::atan(t)).epsilon(1e-12));
}

TEST_CASE("ccf recovers a constructed lead") {
    Rng rng(17);
    std::vector<double> acc(80);
    double level = 0;
    for (auto& v : acc) {
        level += rng.normal();
        v = level;
    }
    for (int shift : {0, 1, 2, 3}) {
        std::vector<double> metric(80);
        for (std::size_t t = 0; t < 80; ++t) metric[t] = acc[t >= static_cast<std::size_t>(shift) ? t - shift : 0];
        const auto r = ccf_first_diff(series("acc", acc), series("metric", metric), 20);
        CHECK(r.best_lag == -shift);
        CHECK(r.best_lag_steps == -500 * shift);
        CHECK(r.lags.size() == 41);
        for (double c : r.correlations) CHECK(std::abs(c) <= 1 + 1e-9);
    }
    // Metric changes before accuracy: positive lag.
    std::vector<double> early(80);
    for (std::size_t t = 0; t < 80; ++t) early[t] = acc[std::min<std::size_t>(t + 2, 79)];
    CHECK(ccf_first_diff(series("acc", acc), series("metric", early), 10).best_lag == 2);
}

TEST_CASE("ccf preconditions") {
    CHECK_THROWS_AS(ccf_first_diff(series("a", std::vector<double>(10, 1)), series("b", std::vector<double>(10)), 20),
                    Error);
    std::vector<double> ramp(30);
    for (std::size_t i = 0; i < 30; ++i) ramp[i] = static_cast<double>(i * i);
    auto a = series("a", ramp);
    auto b = series("b", ramp);
    b.steps[5] += 1;
    CHECK_THROWS_AS(ccf_first_diff(a, b, 5), Error);
    a.steps[5] += 1;
    b = a;
    CHECK_THROWS_AS(ccf_first_diff(a, b, 5), Error);
}

TEST_CASE("aggregation") {
    const auto a = aggregate({1, 2, 3, 4});
    CHECK(a.mean == 2.5);
    CHECK(a.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(a.count == 4);
    CHECK(aggregate({0.7}).sd == 0.0);
}
