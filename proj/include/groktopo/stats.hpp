#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace groktopo {

struct MetricSeries {
    std::string name;
    std::string run_id;
    std::vector<std::int64_t> steps;  // strictly ascending
    std::vector<double> values;

    /// Throws a Contract error on length mismatch or non-ascending steps.
    void validate() const;
};

struct CorrelationResult {
    double rho = 0;
    double p_value = 1;
    std::size_t n = 0;
};

/// Ranks 1..n with ties given their average rank.
std::vector<double> average_ranks(const std::vector<double>& x);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided p-value of a correlation r over n samples from
/// t = r * sqrt((n - 2) / (1 - r^2)) with n - 2 degrees of freedom.
double correlation_p_value(double r, std::size_t n);

/// Spearman rank correlation. Series must share their steps and have n >= 3;
/// a constant series throws a Numerical error.
CorrelationResult spearman(const MetricSeries& x, const MetricSeries& y);
CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y);

struct CcfResult {
    std::vector<int> lags;
    std::vector<double> correlations;
    int best_lag = 0;            // in checkpoints; negative: accuracy leads
    std::int64_t best_lag_steps = 0;
};

/// Cross-correlation of standardized first differences,
///   r(l) = (1/m) sum_t za[t + l] * zm[t]
/// over the m differences, where za is the accuracy series and zm the metric.
/// With this orientation a metric that lags accuracy by k checkpoints peaks at
/// l = -k. best_lag maximizes |r(l)| (ties: smaller |l|, then negative l).
/// Requires n >= maxlag + 3 points at uniform step spacing.
CcfResult ccf_first_diff(const MetricSeries& acc, const MetricSeries& metric, int maxlag = 20);

struct Aggregate {
    double mean = 0;
    double sd = 0;  // sample standard deviation; 0 for a single value
    std::size_t count = 0;
};

Aggregate aggregate(const std::vector<double>& values);

}  // namespace groktopo
