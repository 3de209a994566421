#include "groktopo/config.hpp"

#include <fstream>

#include "groktopo/error.hpp"

namespace groktopo {

using nlohmann::json;

ModelConfig ExperimentConfig::model() const {
    if (arch == Arch::Transformer) {
        TransformerConfig t = transformer;
        t.p = p;
        return t;
    }
    MlpConfig m = mlp;
    m.p = p;
    return m;
}

void ExperimentConfig::validate() const {
    if (name.empty() || name.find('/') != std::string::npos) fail(ErrorKind::Config, "invalid run name '" + name + "'");
    if (p < 2) fail(ErrorKind::Config, "invalid modulus p=" + std::to_string(p));
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::Config, "alpha must lie in (0, 1]");
    if (!(p_frac >= 0.0 && p_frac <= 1.0)) fail(ErrorKind::Config, "p_frac must lie in [0, 1]");
    if (checkpoint_every <= 0 || capture_every < 0) fail(ErrorKind::Config, "invalid checkpoint cadence");
    optim.validate();
    std::visit([](const auto& m) { m.validate(); }, model());
    const auto& a = analysis;
    if (a.every <= 0 || a.lid_neighbors <= 0 || a.lid_subsample <= 0 || a.ph_subsample < 3 || a.fourier_k <= 0) {
        fail(ErrorKind::Config, "invalid analysis options");
    }
    for (const auto& m : a.metrics) {
        if (m != "ph" && m != "lid" && m != "fourier") fail(ErrorKind::Config, "unknown analysis metric '" + m + "'");
    }
}

void to_json(json& j, const ExperimentConfig& c) {
    j = json{{"name", c.name},
             {"arch", to_string(c.arch)},
             {"p", c.p},
             {"alpha", c.alpha},
             {"p_frac", c.p_frac},
             {"seed", c.seed},
             {"optimizer",
              {{"lr", c.optim.lr},
               {"beta1", c.optim.beta1},
               {"beta2", c.optim.beta2},
               {"eps", c.optim.eps},
               {"weight_decay", c.optim.weight_decay},
               {"warmup_steps", c.optim.warmup_steps},
               {"total_steps", c.optim.total_steps},
               {"batch_size", c.optim.batch_size}}},
             {"checkpoint_every", c.checkpoint_every},
             {"capture_every", c.capture_every},
             {"transformer",
              {{"d_model", c.transformer.d_model},
               {"n_layers", c.transformer.n_layers},
               {"n_heads", c.transformer.n_heads},
               {"d_head", c.transformer.d_head},
               {"d_ff", c.transformer.d_ff}}},
             {"mlp", {{"d_embed", c.mlp.d_embed}, {"hidden_widths", c.mlp.hidden_widths}}},
             {"analysis",
              {{"metrics", c.analysis.metrics},
               {"layers", c.analysis.layers},
               {"every", c.analysis.every},
               {"lid_neighbors", c.analysis.lid_neighbors},
               {"lid_subsample", c.analysis.lid_subsample},
               {"ph_subsample", c.analysis.ph_subsample},
               {"fourier_k", c.analysis.fourier_k},
               {"freeze_key_freqs", c.analysis.freeze_key_freqs},
               {"write_diagrams", c.analysis.write_diagrams}}},
             {"seeds", c.seeds}};
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void from_json(const json& j, ExperimentConfig& c) {
    c = ExperimentConfig{};
    read_opt(j, "name", c.name);
    if (j.contains("arch")) c.arch = parse_arch(j.at("arch").get<std::string>());
    read_opt(j, "p", c.p);
    read_opt(j, "alpha", c.alpha);
    read_opt(j, "p_frac", c.p_frac);
    read_opt(j, "seed", c.seed);
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        read_opt(o, "lr", c.optim.lr);
        read_opt(o, "beta1", c.optim.beta1);
        read_opt(o, "beta2", c.optim.beta2);
        read_opt(o, "eps", c.optim.eps);
        read_opt(o, "weight_decay", c.optim.weight_decay);
        read_opt(o, "warmup_steps", c.optim.warmup_steps);
        read_opt(o, "total_steps", c.optim.total_steps);
        read_opt(o, "batch_size", c.optim.batch_size);
    }
    read_opt(j, "checkpoint_every", c.checkpoint_every);
    read_opt(j, "capture_every", c.capture_every);
    if (j.contains("transformer")) {
        const auto& t = j.at("transformer");
        read_opt(t, "d_model", c.transformer.d_model);
        read_opt(t, "n_layers", c.transformer.n_layers);
        read_opt(t, "n_heads", c.transformer.n_heads);
        read_opt(t, "d_head", c.transformer.d_head);
        read_opt(t, "d_ff", c.transformer.d_ff);
    }
    if (j.contains("mlp")) {
        read_opt(j.at("mlp"), "d_embed", c.mlp.d_embed);
        read_opt(j.at("mlp"), "hidden_widths", c.mlp.hidden_widths);
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        read_opt(a, "metrics", c.analysis.metrics);
        read_opt(a, "layers", c.analysis.layers);
        read_opt(a, "every", c.analysis.every);
        read_opt(a, "lid_neighbors", c.analysis.lid_neighbors);
        read_opt(a, "lid_subsample", c.analysis.lid_subsample);
        read_opt(a, "ph_subsample", c.analysis.ph_subsample);
        read_opt(a, "fourier_k", c.analysis.fourier_k);
        read_opt(a, "freeze_key_freqs", c.analysis.freeze_key_freqs);
        read_opt(a, "write_diagrams", c.analysis.write_diagrams);
    }
    read_opt(j, "seeds", c.seeds);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open config " + path.string());
    ExperimentConfig c;
    try {
        c = json::parse(in).get<ExperimentConfig>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, "invalid config " + path.string() + ": " + e.what());
    }
    c.validate();
    return c;
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << json(config).dump(2) << '\n';
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    if (name == "paper") {
        c.name = "paper";
        c.arch = Arch::Transformer;
        c.p = 197;
        c.alpha = 0.3;
        c.optim.total_steps = 60000;
    } else if (name == "desk") {
        c.name = "desk";
        c.arch = Arch::Mlp;
        c.p = 97;
        c.alpha = 0.5;
        c.optim.total_steps = 30000;
        c.seeds = {46};
    } else {
        fail(ErrorKind::Config, "unknown preset '" + name + "' (expected paper or desk)");
    }
    return c;
}

}  // namespace groktopo
