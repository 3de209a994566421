#include "groktopo/models.hpp"

#include <algorithm>
#include <cmath>

#include "groktopo/fpenv.hpp"
#include "groktopo/rng.hpp"

namespace groktopo {

std::string to_string(Arch arch) { return arch == Arch::Transformer ? "transformer" : "mlp"; }

Arch parse_arch(const std::string& name) {
    if (name == "transformer") return Arch::Transformer;
    if (name == "mlp") return Arch::Mlp;
    fail(ErrorKind::Config, "unknown architecture '" + name + "' (expected transformer or mlp)");
}

void TransformerConfig::validate() const {
    if (p < 2) fail(ErrorKind::Config, "transformer: invalid modulus p=" + std::to_string(p));
    if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_head <= 0 || d_ff <= 0) {
        fail(ErrorKind::Config, "transformer: all dimensions must be positive");
    }
    if (n_heads * d_head != d_model) {
        fail(ErrorKind::Config, "transformer: n_heads * d_head (" + std::to_string(n_heads * d_head) +
                                    ") must equal d_model (" + std::to_string(d_model) + ")");
    }
    if (seq_len != 2) fail(ErrorKind::Config, "transformer: seq_len must be 2 (tokens [a, b])");
}

void MlpConfig::validate() const {
    if (p < 2) fail(ErrorKind::Config, "mlp: invalid modulus p=" + std::to_string(p));
    if (d_embed <= 0 || hidden_widths.empty()) fail(ErrorKind::Config, "mlp: d_embed and hidden widths required");
    for (int w : hidden_widths) {
        if (w <= 0) fail(ErrorKind::Config, "mlp: hidden widths must be positive");
    }
}

int modulus(const ModelConfig& config) {
    return std::visit([](const auto& c) { return c.p; }, config);
}

Arch arch_of(const ModelConfig& config) {
    return std::holds_alternative<TransformerConfig>(config) ? Arch::Transformer : Arch::Mlp;
}

std::vector<ParamSpec> param_layout(const ModelConfig& config) {
    std::vector<ParamSpec> out;
    if (const auto* t = std::get_if<TransformerConfig>(&config)) {
        t->validate();
        const int d = t->d_model;
        out.push_back({"tok_emb", {t->p, d}, true});
        out.push_back({"pos_emb", {t->seq_len, d}, true});
        for (int l = 0; l < t->n_layers; ++l) {
            const std::string pre = "blocks." + std::to_string(l) + ".";
            out.push_back({pre + "ln1.gamma", {d}, false});
            out.push_back({pre + "ln1.beta", {d}, false});
            for (const char* m : {"q", "k", "v"}) {
                out.push_back({pre + "attn.w" + m, {d, d}, true});
                out.push_back({pre + "attn.b" + m, {d}, false});
            }
            out.push_back({pre + "attn.wo", {d, d}, true});
            out.push_back({pre + "attn.bo", {d}, false});
            out.push_back({pre + "ln2.gamma", {d}, false});
            out.push_back({pre + "ln2.beta", {d}, false});
            out.push_back({pre + "mlp.w1", {d, t->d_ff}, true});
            out.push_back({pre + "mlp.b1", {t->d_ff}, false});
            out.push_back({pre + "mlp.w2", {t->d_ff, d}, true});
            out.push_back({pre + "mlp.b2", {d}, false});
        }
        out.push_back({"ln_f.gamma", {d}, false});
        out.push_back({"ln_f.beta", {d}, false});
        out.push_back({"readout.w", {d, t->p}, true});
        out.push_back({"readout.b", {t->p}, false});
    } else {
        const auto& m = std::get<MlpConfig>(config);
        m.validate();
        out.push_back({"tok_emb", {m.p, m.d_embed}, true});
        int in = 2 * m.d_embed;
        for (std::size_t l = 0; l < m.hidden_widths.size(); ++l) {
            const std::string pre = "hidden." + std::to_string(l) + ".";
            out.push_back({pre + "w", {in, m.hidden_widths[l]}, true});
            out.push_back({pre + "b", {m.hidden_widths[l]}, false});
            in = m.hidden_widths[l];
        }
        out.push_back({"readout.w", {in, m.p}, true});
        out.push_back({"readout.b", {m.p}, false});
    }
    return out;
}

std::size_t param_count(const ModelConfig& config) {
    std::size_t n = 0;
    for (const auto& spec : param_layout(config)) n += shape_numel(spec.shape);
    return n;
}

const Tensor& ModelParams::at(const std::string& name) const { return tensors[index_of(name)].value; }

Tensor& ModelParams::at(const std::string& name) { return tensors[index_of(name)].value; }

std::size_t ModelParams::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (tensors[i].name == name) return i;
    }
    fail(ErrorKind::Contract, "unknown parameter " + name);
}

std::size_t ModelParams::element_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.value.numel();
    return n;
}

bool ModelParams::all_finite() const {
    return std::all_of(tensors.begin(), tensors.end(), [](const NamedTensor& t) { return t.value.all_finite(); });
}

std::vector<Tensor> ModelParams::values() const {
    std::vector<Tensor> out;
    out.reserve(tensors.size());
    for (const auto& t : tensors) out.push_back(t.value);
    return out;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    auto rng = Rng::stream(seed, streams::kInit);
    ModelParams params;
    for (const auto& spec : param_layout(config)) {
        Tensor t(spec.shape);
        if (ends_with(spec.name, "_emb")) {
            for (auto& v : t.values()) v = static_cast<float>(0.02 * rng.normal());
        } else if (ends_with(spec.name, ".gamma")) {
            t.fill(1.0f);
        } else if (spec.shape.size() == 2) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(spec.shape[0]));
            for (auto& v : t.values()) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * bound);
        }
        params.tensors.push_back({spec.name, std::move(t), spec.decay});
    }
    return params;
}

namespace detail {

std::vector<int> token_ids(std::span<const ModPair> batch, int p, bool interleaved) {
    std::vector<int> ids;
    ids.reserve(batch.size() * 2);
    for (const auto& pr : batch) {
        if (pr.a < 0 || pr.a >= p || pr.b < 0 || pr.b >= p) {
            fail(ErrorKind::Index, "token id out of range: (" + std::to_string(pr.a) + ", " + std::to_string(pr.b) +
                                       ") for p=" + std::to_string(p));
        }
        if (interleaved) {
            ids.push_back(pr.a);
            ids.push_back(pr.b);
        }
    }
    return ids;
}

}  // namespace detail

Tensor predict(const ModelConfig& config, const ModelParams& params, std::span<const ModPair> pairs,
               CapturedStates* states, std::size_t chunk) {
    const FlushDenormals ftz;
    const int p = modulus(config);
    Tensor logits({static_cast<int>(pairs.size()), p});
    std::vector<Tensor> layer_parts;
    if (states) {
        states->embedding = params.at("tok_emb");
        states->layers.clear();
    }
    for (std::size_t start = 0; start < pairs.size(); start += chunk) {
        const std::size_t count = std::min(chunk, pairs.size() - start);
        Graph<float> g;
        std::vector<Var<float>> vars;
        vars.reserve(params.tensors.size());
        for (const auto& t : params.tensors) vars.push_back(g.constant(t.value));
        const auto res =
            model_forward<float>(g, config, std::span<const Var<float>>(vars), pairs.subspan(start, count), states != nullptr);
        const auto& lv = res.logits.value();
        std::copy(lv.values().begin(), lv.values().end(), logits.data() + start * static_cast<std::size_t>(p));
        if (states) {
            if (states->layers.empty()) {
                for (const auto& layer : res.layers) {
                    Shape s = layer.shape();
                    s[0] = static_cast<int>(pairs.size());
                    states->layers.emplace_back(s);
                }
            }
            for (std::size_t l = 0; l < res.layers.size(); ++l) {
                const auto& src = res.layers[l].value();
                std::copy(src.values().begin(), src.values().end(),
                          states->layers[l].data() + start * (src.numel() / count));
            }
        }
    }
    return logits;
}

double argmax_accuracy(const Tensor& logits, std::span<const ModPair> pairs) {
    if (pairs.empty()) return 0.0;
    const std::size_t c = logits.cols();
    std::size_t correct = 0;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const float* row = logits.data() + r * c;
        const auto best = static_cast<int>(std::max_element(row, row + c) - row);
        correct += best == pairs[r].label ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

EvalResult evaluate(const ModelConfig& config, const ModelParams& params, std::span<const ModPair> pairs) {
    if (pairs.empty()) return {};
    return score_logits(predict(config, params, pairs), pairs);
}

EvalResult score_logits(const Tensor& logits, std::span<const ModPair> pairs) {
    EvalResult out;
    if (pairs.empty()) return out;
    const std::size_t c = logits.cols();
    double total = 0.0;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const float* row = logits.data() + r * c;
        const double mx = *std::max_element(row, row + c);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += std::exp(static_cast<double>(row[j]) - mx);
        total += mx + std::log(s) - static_cast<double>(row[pairs[r].label]);
    }
    out.loss = total / static_cast<double>(pairs.size());
    out.accuracy = argmax_accuracy(logits, pairs);
    return out;
}

}  // namespace groktopo
