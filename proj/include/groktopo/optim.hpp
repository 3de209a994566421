#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "groktopo/models.hpp"

namespace groktopo {

struct OptimHyper {
    double lr = 3e-3;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-6;
    double weight_decay = 0.1;
    int warmup_steps = 10;
    int total_steps = 60000;
    int batch_size = 512;

    void validate() const;
    friend bool operator==(const OptimHyper&, const OptimHyper&) = default;
};

struct OptimState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::int64_t t = 0;  // updates applied so far
};

/// lr * min(1, (step + 1) / warmup_steps): full rate from step warmup-1 on.
double lr_at(std::int64_t step, const OptimHyper& hyper);

OptimState init_optim_state(const ModelParams& params);

/// One decoupled AdamW update at learning rate lr_at(state.t):
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
/// The decay term is skipped for tensors flagged decay=false (biases and
/// LayerNorm gain/shift). Throws a Numerical error naming the tensor and
/// element if any gradient is not finite; nothing is modified in that case.
void adamw_step(ModelParams& params, std::span<const Tensor> grads, OptimState& state, const OptimHyper& hyper);

}  // namespace groktopo
