#include <doctest.h>

#include <cmath>
#include <vector>

#include "groktopo/error.hpp"
#include "groktopo/gradcheck.hpp"
#include "groktopo/models.hpp"
#include "groktopo/rng.hpp"
#include "oracles/grad_cases.hpp"

using namespace groktopo;
using namespace gradcases;

namespace {

std::size_t linear(std::size_t in, std::size_t out) { return in * out + out; }

std::size_t transformer_count(std::size_t p, std::size_t d, std::size_t layers, std::size_t heads, std::size_t dh,
                              std::size_t ff) {
    const std::size_t inner = heads * dh;
    const std::size_t block = 2 * d + 3 * linear(d, inner) + linear(inner, d) + 2 * d + linear(d, ff) + linear(ff, d);
    return p * d + 2 * d + layers * block + 2 * d + linear(d, p);
}

}  // namespace

TEST_CASE("parameter counts follow the layer arithmetic") {
    MlpConfig desk;
    desk.p = 97;
    CHECK(param_count(desk) == 97 * 128 + linear(256, 512) + 2 * linear(512, 512) + linear(512, 97));
    CHECK(param_count(desk) == 719073);

    TransformerConfig t;
    t.p = 197;
    CHECK(param_count(t) == transformer_count(197, 128, 2, 4, 32, 256));

    std::size_t from_layout = 0;
    for (const auto& spec : param_layout(t)) from_layout += shape_numel(spec.shape);
    CHECK(from_layout == param_count(t));
    CHECK(init_params(t, 1).element_count() == param_count(t));
}

TEST_CASE("decay flags exempt biases and LayerNorm parameters") {
    TransformerConfig t;
    t.p = 11;
    for (const auto& spec : param_layout(t)) {
        CAPTURE(spec.name);
        const bool exempt = spec.name.find(".b") != std::string::npos && spec.shape.size() == 1;
        const bool norm = spec.name.find("ln") != std::string::npos;
        CHECK(spec.decay == !(exempt || norm));
    }
}

TEST_CASE("initialization is deterministic per seed") {
    MlpConfig m;
    m.p = 13;
    m.d_embed = 8;
    m.hidden_widths = {16, 16};
    CHECK(init_params(m, 5) == init_params(m, 5));
    CHECK_FALSE(init_params(m, 5) == init_params(m, 6));
    const auto params = init_params(m, 5);
    const auto& w = params.at("hidden.0.w");
    const double bound = 1 / std::sqrt(16.0);
    for (float v : w.values()) CHECK(std::abs(v) <= bound);
    for (float v : params.at("hidden.0.b").values()) CHECK(v == 0.0f);
}

TEST_CASE("forward shapes and captured states") {
    TransformerConfig t;
    t.p = 7;
    t.d_model = 16;
    t.n_heads = 2;
    t.d_head = 8;
    t.d_ff = 32;
    const auto batch = batch_of(7, 5, 3);
    CapturedStates states;
    const auto logits = predict(t, init_params(t, 2), batch, &states, 2);
    CHECK(logits.shape() == Shape{5, 7});
    REQUIRE(states.layers.size() == 2);
    CHECK(states.layers[0].shape() == Shape{5, 2, 16});
    CHECK(states.embedding.shape() == Shape{7, 16});

    MlpConfig m;
    m.p = 7;
    m.d_embed = 4;
    m.hidden_widths = {10, 12, 9};
    CapturedStates ms;
    const auto ml = predict(m, init_params(m, 2), batch, &ms);
    CHECK(ml.shape() == Shape{5, 7});
    REQUIRE(ms.layers.size() == 3);
    CHECK(ms.layers[1].shape() == Shape{5, 12});
    for (float v : ms.layers[0].values()) CHECK(v >= -0.17f);  // GELU minimum is about -0.17
}

TEST_CASE("chunked prediction equals a single pass") {
    MlpConfig m;
    m.p = 11;
    m.d_embed = 6;
    m.hidden_widths = {20};
    const auto params = init_params(m, 9);
    const auto batch = batch_of(11, 37, 4);
    CHECK(predict(m, params, batch, nullptr, 5) == predict(m, params, batch, nullptr, 4096));
}

TEST_CASE("full model losses match central differences") {
    CHECK(model_grad_error(tiny_mlp(), 1).max_rel_error < 1e-3);
    CHECK(model_grad_error(tiny_transformer(), 2).max_rel_error < 1e-3);
}

TEST_CASE("invalid architectures are rejected") {
    TransformerConfig t;
    t.n_heads = 0;
    CHECK_THROWS_AS(param_layout(t), Error);
    MlpConfig m;
    m.hidden_widths = {};
    CHECK_THROWS_AS(param_layout(m), Error);
    CHECK_THROWS_AS(parse_arch("cnn"), Error);
}
