#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "groktopo/rng.hpp"
#include "groktopo/tensor.hpp"

namespace groktopo {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
};

/// Builds a scalar loss from parameter leaves inside the given graph.
template <typename T>
using LossBuilder = std::function<Var<T>(Graph<T>&, const std::vector<Var<T>>&)>;

/// Compares reverse-mode gradients with central differences
/// (f(x + h e_i) - f(x - h e_i)) / 2h on `samples` coordinates drawn uniformly
/// without replacement (all coordinates when there are fewer). The relative
/// error of a coordinate is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
template <typename T>
GradCheckReport grad_check(const LossBuilder<T>& loss_fn, std::vector<BasicTensor<T>> params, double step_h,
                           std::size_t samples = 100, std::uint64_t seed = 0) {
    std::vector<BasicTensor<T>> analytic;
    {
        Graph<T> g;
        std::vector<Var<T>> vars;
        for (const auto& p : params) vars.push_back(g.variable(p));
        const auto loss = loss_fn(g, vars);
        g.backward(loss);
        for (const auto& v : vars) analytic.push_back(g.grad(v));
    }
    auto eval = [&]() {
        Graph<T> g;
        std::vector<Var<T>> vars;
        for (const auto& p : params) vars.push_back(g.constant(p));
        return static_cast<double>(loss_fn(g, vars).value()[0]);
    };

    std::vector<std::pair<std::size_t, std::size_t>> coords;
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t].numel(); ++i) coords.emplace_back(t, i);
    }
    Rng rng(seed);
    rng.shuffle(std::span(coords));
    if (coords.size() > samples) coords.resize(samples);

    GradCheckReport report;
    for (const auto& [t, i] : coords) {
        const T orig = params[t][i];
        params[t][i] = static_cast<T>(orig + step_h);
        const double up = eval();
        params[t][i] = static_cast<T>(orig - step_h);
        const double down = eval();
        params[t][i] = orig;
        const double numeric = (up - down) / (2.0 * step_h);
        const double a = static_cast<double>(analytic[t][i]);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
        report.max_rel_error = std::max(report.max_rel_error, std::abs(a - numeric) / denom);
        ++report.coordinates;
    }
    return report;
}

}  // namespace groktopo
