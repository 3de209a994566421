#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "groktopo/data.hpp"
#include "groktopo/ops.hpp"
#include "groktopo/tensor.hpp"

namespace groktopo {

enum class Arch { Transformer, Mlp };

std::string to_string(Arch arch);
Arch parse_arch(const std::string& name);

/// Two-block pre-LN encoder over the token sequence [a, b].
struct TransformerConfig {
    int p = 113;
    int d_model = 128;
    int n_layers = 2;
    int n_heads = 4;
    int d_head = 32;
    int d_ff = 256;
    int seq_len = 2;

    void validate() const;
    friend bool operator==(const TransformerConfig&, const TransformerConfig&) = default;
};

/// concat(emb[a], emb[b]) followed by GELU hidden layers and a linear readout.
struct MlpConfig {
    int p = 113;
    int d_embed = 128;
    std::vector<int> hidden_widths{512, 512, 512};

    void validate() const;
    friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

using ModelConfig = std::variant<TransformerConfig, MlpConfig>;

int modulus(const ModelConfig& config);
Arch arch_of(const ModelConfig& config);

struct ParamSpec {
    std::string name;
    Shape shape;
    bool decay = true;  // weight decay applies (weights, embeddings)
};

/// Parameter names, shapes and decay flags in their canonical order.
std::vector<ParamSpec> param_layout(const ModelConfig& config);

/// Total number of scalar parameters implied by the architecture.
std::size_t param_count(const ModelConfig& config);

struct NamedTensor {
    std::string name;
    Tensor value;
    bool decay = true;

    friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct ModelParams {
    std::vector<NamedTensor> tensors;

    const Tensor& at(const std::string& name) const;
    Tensor& at(const std::string& name);
    std::size_t index_of(const std::string& name) const;
    std::size_t element_count() const;
    bool all_finite() const;
    std::vector<Tensor> values() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Linear and attention weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// embeddings ~ 0.02 * N(0, 1), biases 0, LayerNorm gamma 1 / beta 0.
/// Draws come from the init stream of `seed` in canonical parameter order.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Hidden states recorded during a forward pass. `embedding` is the raw token
/// embedding matrix (layer 0). For the transformer, layers[k-1] holds the
/// output of block k with shape (B, 2, d_model); for the MLP, layers[k-1] holds
/// the GELU activation of hidden layer k with shape (B, width_k).
struct CapturedStates {
    Tensor embedding;
    std::vector<Tensor> layers;
};

template <typename T>
struct ForwardResult {
    Var<T> logits;
    std::vector<Var<T>> layers;  // filled only when capture is requested
};

namespace detail {

std::vector<int> token_ids(std::span<const ModPair> batch, int p, bool interleaved);

template <typename T>
class ParamLookup {
public:
    ParamLookup(const std::vector<ParamSpec>& layout, std::span<const Var<T>> vars) : layout_(layout), vars_(vars) {
        if (vars.size() != layout.size()) {
            fail(ErrorKind::Contract, "expected " + std::to_string(layout.size()) + " parameters, got " +
                                          std::to_string(vars.size()));
        }
    }

    Var<T> operator()(const std::string& name) const {
        for (std::size_t i = 0; i < layout_.size(); ++i) {
            if (layout_[i].name == name) {
                if (vars_[i].value().shape() != layout_[i].shape) {
                    fail(ErrorKind::Shape, "parameter " + name + " has shape " + shape_str(vars_[i].value().shape()) +
                                               ", expected " + shape_str(layout_[i].shape));
                }
                return vars_[i];
            }
        }
        fail(ErrorKind::Contract, "unknown parameter " + name);
    }

private:
    const std::vector<ParamSpec>& layout_;
    std::span<const Var<T>> vars_;
};

}  // namespace detail

template <typename T>
ForwardResult<T> transformer_forward([[maybe_unused]] Graph<T>& graph, const TransformerConfig& cfg, std::span<const Var<T>> params,
                                     std::span<const ModPair> batch, bool capture) {
    using namespace ops;
    const auto layout = param_layout(cfg);
    const ::groktopo::detail::ParamLookup<T> P(layout, params);
    const int b = static_cast<int>(batch.size());
    const auto ids = ::groktopo::detail::token_ids(batch, cfg.p, true);

    Var<T> x = reshape(gather(P("tok_emb"), std::span<const int>(ids)), {b, cfg.seq_len, cfg.d_model});
    x = add(x, P("pos_emb"));
    ForwardResult<T> out;
    for (int l = 0; l < cfg.n_layers; ++l) {
        const std::string pre = "blocks." + std::to_string(l) + ".";
        const Var<T> h = layer_norm(x, P(pre + "ln1.gamma"), P(pre + "ln1.beta"));
        const Var<T> q = add(matmul(h, P(pre + "attn.wq")), P(pre + "attn.bq"));
        const Var<T> k = add(matmul(h, P(pre + "attn.wk")), P(pre + "attn.bk"));
        const Var<T> v = add(matmul(h, P(pre + "attn.wv")), P(pre + "attn.bv"));
        const Var<T> a = attention(q, k, v, cfg.n_heads);
        x = add(x, add(matmul(a, P(pre + "attn.wo")), P(pre + "attn.bo")));
        const Var<T> h2 = layer_norm(x, P(pre + "ln2.gamma"), P(pre + "ln2.beta"));
        const Var<T> f = gelu(add(matmul(h2, P(pre + "mlp.w1")), P(pre + "mlp.b1")));
        x = add(x, add(matmul(f, P(pre + "mlp.w2")), P(pre + "mlp.b2")));
        if (capture) out.layers.push_back(x);
    }
    Var<T> last = reshape(slice(x, 1, cfg.seq_len - 1, cfg.seq_len), {b, cfg.d_model});
    last = layer_norm(last, P("ln_f.gamma"), P("ln_f.beta"));
    out.logits = add(matmul(last, P("readout.w")), P("readout.b"));
    return out;
}

template <typename T>
ForwardResult<T> mlp_forward([[maybe_unused]] Graph<T>& graph, const MlpConfig& cfg, std::span<const Var<T>> params,
                             std::span<const ModPair> batch, bool capture) {
    using namespace ops;
    const auto layout = param_layout(cfg);
    const ::groktopo::detail::ParamLookup<T> P(layout, params);
    std::vector<int> as;
    std::vector<int> bs;
    as.reserve(batch.size());
    bs.reserve(batch.size());
    for (const auto& pr : batch) {
        as.push_back(pr.a);
        bs.push_back(pr.b);
    }
    const Var<T> emb = P("tok_emb");
    Var<T> x = concat(gather(emb, std::span<const int>(as)), gather(emb, std::span<const int>(bs)), -1);
    ForwardResult<T> out;
    for (std::size_t l = 0; l < cfg.hidden_widths.size(); ++l) {
        const std::string pre = "hidden." + std::to_string(l) + ".";
        x = gelu(add(matmul(x, P(pre + "w")), P(pre + "b")));
        if (capture) out.layers.push_back(x);
    }
    out.logits = add(matmul(x, P("readout.w")), P("readout.b"));
    return out;
}

template <typename T>
ForwardResult<T> model_forward(Graph<T>& graph, const ModelConfig& config, std::span<const Var<T>> params,
                               std::span<const ModPair> batch, bool capture) {
    if (const auto* t = std::get_if<TransformerConfig>(&config)) {
        return transformer_forward(graph, *t, params, batch, capture);
    }
    return mlp_forward(graph, std::get<MlpConfig>(config), params, batch, capture);
}

/// Inference without gradient tracking, processed in chunks of `chunk` pairs.
/// Returns logits (N, p); fills `states` when non-null.
Tensor predict(const ModelConfig& config, const ModelParams& params, std::span<const ModPair> pairs,
               CapturedStates* states = nullptr, std::size_t chunk = 2048);

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// Mean cross-entropy and argmax accuracy against the stored labels.
EvalResult evaluate(const ModelConfig& config, const ModelParams& params, std::span<const ModPair> pairs);
EvalResult score_logits(const Tensor& logits, std::span<const ModPair> pairs);

/// Accuracy of a logits table (N, p) against labels; argmax ties go to the
/// lowest class index.
double argmax_accuracy(const Tensor& logits, std::span<const ModPair> pairs);

}  // namespace groktopo
