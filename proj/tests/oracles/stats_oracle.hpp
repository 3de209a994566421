#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// Spearman by counting ranks: 1 + #smaller + (#equal others) / 2.
inline double counting_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            double less = 0;
            double equal = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (v[j] < v[i]) less += 1;
                if (j != i && v[j] == v[i]) equal += 1;
            }
            r[i] = 1 + less + equal / 2;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double mean = (static_cast<double>(n) + 1) / 2;
    long double sxy = 0;
    long double sxx = 0;
    long double syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += static_cast<long double>(rx[i] - mean) * (ry[i] - mean);
        sxx += static_cast<long double>(rx[i] - mean) * (rx[i] - mean);
        syy += static_cast<long double>(ry[i] - mean) * (ry[i] - mean);
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

}  // namespace oracle
