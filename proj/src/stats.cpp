#include "groktopo/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "groktopo/error.hpp"

namespace groktopo {

void MetricSeries::validate() const {
    if (steps.size() != values.size()) {
        fail(ErrorKind::Contract, "series " + name + ": " + std::to_string(steps.size()) + " steps but " +
                                      std::to_string(values.size()) + " values");
    }
    for (std::size_t i = 1; i < steps.size(); ++i) {
        if (steps[i] <= steps[i - 1]) fail(ErrorKind::Contract, "series " + name + ": steps not strictly ascending");
    }
}

std::vector<double> average_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
        i = j + 1;
    }
    return rank;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size()) fail(ErrorKind::Contract, "pearson: length mismatch");
    if (n == 0) fail(ErrorKind::Numerical, "pearson: empty series");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::Numerical, "correlation undefined: constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double correlation_p_value(double r, std::size_t n) {
    if (n < 3) fail(ErrorKind::Contract, "correlation p-value needs n >= 3");
    if (std::abs(r) >= 1.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = r * std::sqrt(df / ((1.0 - r) * (1.0 + r)));
    const boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) fail(ErrorKind::Contract, "spearman: series lengths differ");
    if (x.size() < 3) fail(ErrorKind::Contract, "spearman: need at least 3 samples, got " + std::to_string(x.size()));
    CorrelationResult out;
    out.n = x.size();
    out.rho = pearson(average_ranks(x), average_ranks(y));
    out.p_value = correlation_p_value(out.rho, out.n);
    return out;
}

CorrelationResult spearman(const MetricSeries& x, const MetricSeries& y) {
    x.validate();
    y.validate();
    if (x.steps != y.steps) fail(ErrorKind::Contract, "spearman: " + x.name + " and " + y.name + " are not aligned");
    return spearman(x.values, y.values);
}

namespace {

std::vector<double> standardized_diff(const std::vector<double>& v, const std::string& name) {
    std::vector<double> d(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) d[i] = v[i + 1] - v[i];
    const double m = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    double ss = 0.0;
    for (double x : d) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(d.size()));
    if (!(sd > 0.0)) fail(ErrorKind::Numerical, "ccf: first differences of " + name + " are constant");
    for (double& x : d) x = (x - m) / sd;
    return d;
}

}  // namespace

CcfResult ccf_first_diff(const MetricSeries& acc, const MetricSeries& metric, int maxlag) {
    acc.validate();
    metric.validate();
    if (maxlag < 0) fail(ErrorKind::Config, "ccf: maxlag must be >= 0");
    if (acc.steps != metric.steps) fail(ErrorKind::Contract, "ccf: " + acc.name + " and " + metric.name + " are not aligned");
    const std::size_t n = acc.values.size();
    if (n < static_cast<std::size_t>(maxlag) + 3) {
        fail(ErrorKind::Contract, "ccf: need at least maxlag + 3 = " + std::to_string(maxlag + 3) + " points, got " +
                                      std::to_string(n));
    }
    const std::int64_t spacing = acc.steps[1] - acc.steps[0];
    for (std::size_t i = 2; i < n; ++i) {
        if (acc.steps[i] - acc.steps[i - 1] != spacing) fail(ErrorKind::Contract, "ccf: checkpoint spacing is not uniform");
    }
    const auto za = standardized_diff(acc.values, acc.name);
    const auto zm = standardized_diff(metric.values, metric.name);
    const auto m = static_cast<std::ptrdiff_t>(za.size());

    CcfResult out;
    for (int lag = -maxlag; lag <= maxlag; ++lag) {
        double s = 0.0;
        for (std::ptrdiff_t t = 0; t < m; ++t) {
            const std::ptrdiff_t u = t + lag;
            if (u >= 0 && u < m) s += za[static_cast<std::size_t>(u)] * zm[static_cast<std::size_t>(t)];
        }
        out.lags.push_back(lag);
        out.correlations.push_back(s / static_cast<double>(m));
    }
    double best = -1.0;
    for (std::size_t i = 0; i < out.lags.size(); ++i) {
        const double a = std::abs(out.correlations[i]);
        const int lag = out.lags[i];
        const bool better = a > best || (a == best && (std::abs(lag) < std::abs(out.best_lag) ||
                                                       (std::abs(lag) == std::abs(out.best_lag) && lag < out.best_lag)));
        if (better) {
            best = a;
            out.best_lag = lag;
        }
    }
    out.best_lag_steps = static_cast<std::int64_t>(out.best_lag) * spacing;
    return out;
}

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate a;
    a.count = values.size();
    if (values.empty()) return a;
    a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return a;
}

}  // namespace groktopo
