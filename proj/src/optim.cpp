#include "groktopo/optim.hpp"

#include <algorithm>
#include <cmath>

namespace groktopo {

void OptimHyper::validate() const {
    if (!(lr > 0) || !(eps > 0) || !(weight_decay >= 0)) fail(ErrorKind::Config, "optimizer: lr, eps must be positive");
    if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) {
        fail(ErrorKind::Config, "optimizer: betas must lie in (0, 1)");
    }
    if (warmup_steps <= 0 || total_steps <= 0 || batch_size <= 0) {
        fail(ErrorKind::Config, "optimizer: warmup_steps, total_steps and batch_size must be positive");
    }
}

double lr_at(std::int64_t step, const OptimHyper& hyper) {
    const double ramp = static_cast<double>(step + 1) / static_cast<double>(hyper.warmup_steps);
    return hyper.lr * std::min(1.0, ramp);
}

OptimState init_optim_state(const ModelParams& params) {
    OptimState state;
    for (const auto& t : params.tensors) {
        state.m.emplace_back(t.value.shape());
        state.v.emplace_back(t.value.shape());
    }
    return state;
}

void adamw_step(ModelParams& params, std::span<const Tensor> grads, OptimState& state, const OptimHyper& hyper) {
    if (grads.size() != params.tensors.size() || state.m.size() != params.tensors.size()) {
        fail(ErrorKind::Contract, "adamw_step: gradient/state count does not match parameters");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (grads[i].shape() != params.tensors[i].value.shape()) {
            fail(ErrorKind::Shape, "adamw_step: gradient for " + params.tensors[i].name + " has shape " +
                                       shape_str(grads[i].shape()) + ", parameter has " +
                                       shape_str(params.tensors[i].value.shape()));
        }
        const auto vals = grads[i].values();
        const auto bad = std::find_if(vals.begin(), vals.end(), [](float g) { return !std::isfinite(g); });
        if (bad != vals.end()) {
            fail(ErrorKind::Numerical, "adamw_step: non-finite gradient " + std::to_string(*bad) + " in " +
                                           params.tensors[i].name + "[" + std::to_string(bad - vals.begin()) +
                                           "] at update " + std::to_string(state.t));
        }
    }

    const double lr = lr_at(state.t, hyper);
    state.t += 1;
    const double b1 = hyper.beta1;
    const double b2 = hyper.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        auto& theta = params.tensors[i].value;
        const double wd = params.tensors[i].decay ? hyper.weight_decay : 0.0;
        float* w = theta.data();
        float* m = state.m[i].data();
        float* v = state.v[i].data();
        const float* g = grads[i].data();
        for (std::size_t j = 0; j < theta.numel(); ++j) {
            const double gj = g[j];
            const double mj = b1 * m[j] + (1.0 - b1) * gj;
            const double vj = b2 * v[j] + (1.0 - b2) * gj * gj;
            m[j] = static_cast<float>(mj);
            v[j] = static_cast<float>(vj);
            const double update = (mj / c1) / (std::sqrt(vj / c2) + hyper.eps) + wd * w[j];
            w[j] = static_cast<float>(w[j] - lr * update);
        }
    }
}

}  // namespace groktopo
