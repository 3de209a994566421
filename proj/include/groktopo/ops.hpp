#pragma once

// Differentiable primitives over Graph<T>. Each op computes its forward value
// eagerly and registers a closure that adds its input gradients.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "groktopo/kernels.hpp"
#include "groktopo/tensor.hpp"

namespace groktopo::ops {

namespace detail {

inline void require_same_graph(const void* a, const void* b, const char* op) {
    if (a != b) fail(ErrorKind::Contract, std::string(op) + ": operands belong to different graphs");
}

inline bool is_suffix(const Shape& full, const Shape& suffix) {
    if (suffix.size() > full.size()) return false;
    return std::equal(suffix.begin(), suffix.end(), full.end() - static_cast<std::ptrdiff_t>(suffix.size()));
}

inline int norm_axis(int axis, int rank, const char* op) {
    const int a = axis < 0 ? axis + rank : axis;
    if (a < 0 || a >= rank) fail(ErrorKind::Shape, std::string(op) + ": axis " + std::to_string(axis) + " out of range");
    return a;
}

struct AxisSplit {
    std::size_t outer = 1;
    std::size_t len = 1;
    std::size_t inner = 1;
};

inline AxisSplit split_at(const Shape& shape, int axis) {
    AxisSplit s;
    for (int i = 0; i < axis; ++i) s.outer *= static_cast<std::size_t>(shape[static_cast<std::size_t>(i)]);
    s.len = static_cast<std::size_t>(shape[static_cast<std::size_t>(axis)]);
    for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < shape.size(); ++i) {
        s.inner *= static_cast<std::size_t>(shape[i]);
    }
    return s;
}

template <typename T>
T normal_cdf(T x) {
    return T(0.5) * std::erfc(-x / std::numbers::sqrt2_v<T>);
}

template <typename T>
T normal_pdf(T x) {
    return std::exp(T(-0.5) * x * x) / std::sqrt(T(2) * std::numbers::pi_v<T>);
}

}  // namespace detail

/// [..., k] x [k, n] -> [..., n]
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
    detail::require_same_graph(a.graph, b.graph, "matmul");
    const auto& av = a.value();
    const auto& bv = b.value();
    if (bv.rank() != 2 || av.rank() < 1 || av.dim(-1) != bv.dim(0)) {
        fail(ErrorKind::Shape, "matmul: incompatible shapes " + shape_str(av.shape()) + " and " + shape_str(bv.shape()));
    }
    const std::size_t m = av.rows();
    const std::size_t k = av.cols();
    const std::size_t n = bv.cols();
    Shape out_shape = av.shape();
    out_shape.back() = bv.dim(1);
    BasicTensor<T> out(out_shape);
    kernels::matmul(av.data(), bv.data(), out.data(), m, n, k);
    return a.graph->record(std::move(out), {a.id, b.id}, [m, n, k](Graph<T>& g, std::size_t self) {
        const auto ia = g.inputs(self)[0];
        const auto ib = g.inputs(self)[1];
        const auto& gc = g.grad_buffer(self);
        if (g.requires_grad(ia)) {
            kernels::matmul_nt(gc.data(), g.value(ib).data(), g.grad_buffer(ia).data(), m, k, n, true);
        }
        if (g.requires_grad(ib)) {
            kernels::matmul_tn(g.value(ia).data(), gc.data(), g.grad_buffer(ib).data(), k, n, m, true);
        }
    });
}

/// Elementwise sum; `b` may also broadcast over leading axes of `a` when its
/// shape is a suffix of a's shape (biases, positional embeddings).
template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
    detail::require_same_graph(a.graph, b.graph, "add");
    const auto& av = a.value();
    const auto& bv = b.value();
    if (!detail::is_suffix(av.shape(), bv.shape())) {
        fail(ErrorKind::Shape, "add: incompatible shapes " + shape_str(av.shape()) + " and " + shape_str(bv.shape()));
    }
    const std::size_t inner = std::max<std::size_t>(bv.numel(), 1);
    BasicTensor<T> out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i % inner];
    return a.graph->record(std::move(out), {a.id, b.id}, [inner](Graph<T>& g, std::size_t self) {
        const auto ia = g.inputs(self)[0];
        const auto ib = g.inputs(self)[1];
        const auto& gc = g.grad_buffer(self);
        if (g.requires_grad(ia)) {
            auto& ga = g.grad_buffer(ia);
            for (std::size_t i = 0; i < gc.numel(); ++i) ga[i] += gc[i];
        }
        if (g.requires_grad(ib)) {
            auto& gb = g.grad_buffer(ib);
            for (std::size_t i = 0; i < gc.numel(); ++i) gb[i % inner] += gc[i];
        }
    });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
    detail::require_same_graph(a.graph, b.graph, "mul");
    const auto& av = a.value();
    const auto& bv = b.value();
    if (av.shape() != bv.shape()) {
        fail(ErrorKind::Shape, "mul: incompatible shapes " + shape_str(av.shape()) + " and " + shape_str(bv.shape()));
    }
    BasicTensor<T> out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
    return a.graph->record(std::move(out), {a.id, b.id}, [](Graph<T>& g, std::size_t self) {
        const auto ia = g.inputs(self)[0];
        const auto ib = g.inputs(self)[1];
        const auto& gc = g.grad_buffer(self);
        if (g.requires_grad(ia)) {
            auto& ga = g.grad_buffer(ia);
            const auto& bv = g.value(ib);
            for (std::size_t i = 0; i < gc.numel(); ++i) ga[i] += gc[i] * bv[i];
        }
        if (g.requires_grad(ib)) {
            auto& gb = g.grad_buffer(ib);
            const auto& av = g.value(ia);
            for (std::size_t i = 0; i < gc.numel(); ++i) gb[i] += gc[i] * av[i];
        }
    });
}

template <typename T>
Var<T> scale(Var<T> a, T factor) {
    BasicTensor<T> out = a.value();
    for (auto& v : out.values()) v *= factor;
    return a.graph->record(std::move(out), {a.id}, [factor](Graph<T>& g, std::size_t self) {
        const auto& gc = g.grad_buffer(self);
        auto& ga = g.grad_buffer(g.inputs(self)[0]);
        for (std::size_t i = 0; i < gc.numel(); ++i) ga[i] += factor * gc[i];
    });
}

/// Sum of all elements as a scalar of shape ().
template <typename T>
Var<T> sum(Var<T> a) {
    T s = 0;
    for (T v : a.value().values()) s += v;
    return a.graph->record(BasicTensor<T>({}, {s}), {a.id}, [](Graph<T>& g, std::size_t self) {
        const T gs = g.grad_buffer(self)[0];
        for (auto& v : g.grad_buffer(g.inputs(self)[0]).values()) v += gs;
    });
}

template <typename T>
Var<T> reshape(Var<T> a, Shape shape) {
    return a.graph->record(a.value().reshaped(std::move(shape)), {a.id}, [](Graph<T>& g, std::size_t self) {
        const auto& gc = g.grad_buffer(self);
        auto& ga = g.grad_buffer(g.inputs(self)[0]);
        for (std::size_t i = 0; i < gc.numel(); ++i) ga[i] += gc[i];
    });
}

/// Rows of `table` [V, d] selected by `indices` -> [n, d].
template <typename T>
Var<T> gather(Var<T> table, std::span<const int> indices) {
    const auto& tv = table.value();
    if (tv.rank() != 2) fail(ErrorKind::Shape, "gather: table must be rank 2, got " + shape_str(tv.shape()));
    const int rows = tv.dim(0);
    const auto d = static_cast<std::size_t>(tv.dim(1));
    BasicTensor<T> out({static_cast<int>(indices.size()), tv.dim(1)});
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const int ix = indices[r];
        if (ix < 0 || ix >= rows) {
            fail(ErrorKind::Index, "gather: index " + std::to_string(ix) + " out of range for " + std::to_string(rows) +
                                       " rows");
        }
        std::copy_n(tv.data() + static_cast<std::size_t>(ix) * d, d, out.data() + r * d);
    }
    std::vector<int> idx(indices.begin(), indices.end());
    return table.graph->record(std::move(out), {table.id}, [idx = std::move(idx), d](Graph<T>& g, std::size_t self) {
        const auto& gc = g.grad_buffer(self);
        auto& gt = g.grad_buffer(g.inputs(self)[0]);
        for (std::size_t r = 0; r < idx.size(); ++r) {
            T* dst = gt.data() + static_cast<std::size_t>(idx[r]) * d;
            const T* src = gc.data() + r * d;
            for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
    });
}

/// Exact GELU: x * Phi(x).
template <typename T>
Var<T> gelu(Var<T> a) {
    BasicTensor<T> out = a.value();
    for (auto& v : out.values()) v = v * detail::normal_cdf(v);
    return a.graph->record(std::move(out), {a.id}, [](Graph<T>& g, std::size_t self) {
        const auto ia = g.inputs(self)[0];
        const auto& x = g.value(ia);
        const auto& gc = g.grad_buffer(self);
        auto& ga = g.grad_buffer(ia);
        for (std::size_t i = 0; i < gc.numel(); ++i) {
            const T xi = x[i];
            ga[i] += gc[i] * (detail::normal_cdf(xi) + xi * detail::normal_pdf(xi));
        }
    });
}

/// LayerNorm over the last axis: gamma * (x - mean) / sqrt(var + eps) + beta,
/// with the biased (population) variance.
template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gamma, Var<T> beta, T eps = T(1e-5)) {
    const auto& xv = x.value();
    const std::size_t d = xv.cols();
    const std::size_t rows = xv.rows();
    if (gamma.value().shape() != Shape{static_cast<int>(d)} || beta.value().shape() != Shape{static_cast<int>(d)}) {
        fail(ErrorKind::Shape, "layer_norm: gamma/beta " + shape_str(gamma.value().shape()) + "/" +
                                   shape_str(beta.value().shape()) + " do not match input " + shape_str(xv.shape()));
    }
    BasicTensor<T> out(xv.shape());
    std::vector<T> xhat(xv.numel());
    std::vector<T> inv_std(rows);
    const auto& gv = gamma.value();
    const auto& bv = beta.value();
    for (std::size_t r = 0; r < rows; ++r) {
        const T* row = xv.data() + r * d;
        T mean = 0;
        for (std::size_t j = 0; j < d; ++j) mean += row[j];
        mean /= static_cast<T>(d);
        T var = 0;
        for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= static_cast<T>(d);
        const T is = T(1) / std::sqrt(var + eps);
        inv_std[r] = is;
        for (std::size_t j = 0; j < d; ++j) {
            const T h = (row[j] - mean) * is;
            xhat[r * d + j] = h;
            out[r * d + j] = gv[j] * h + bv[j];
        }
    }
    return x.graph->record(
        std::move(out), {x.id, gamma.id, beta.id},
        [xhat = std::move(xhat), inv_std = std::move(inv_std), d, rows](Graph<T>& g, std::size_t self) {
            const auto ix = g.inputs(self)[0];
            const auto igamma = g.inputs(self)[1];
            const auto ibeta = g.inputs(self)[2];
            const auto& gc = g.grad_buffer(self);
            if (g.requires_grad(igamma)) {
                auto& gg = g.grad_buffer(igamma);
                for (std::size_t i = 0; i < gc.numel(); ++i) gg[i % d] += gc[i] * xhat[i];
            }
            if (g.requires_grad(ibeta)) {
                auto& gb = g.grad_buffer(ibeta);
                for (std::size_t i = 0; i < gc.numel(); ++i) gb[i % d] += gc[i];
            }
            if (g.requires_grad(ix)) {
                const auto& gv = g.value(igamma);
                auto& gx = g.grad_buffer(ix);
                std::vector<T> dh(d);
                for (std::size_t r = 0; r < rows; ++r) {
                    T mean_dh = 0;
                    T mean_dh_h = 0;
                    for (std::size_t j = 0; j < d; ++j) {
                        dh[j] = gc[r * d + j] * gv[j];
                        mean_dh += dh[j];
                        mean_dh_h += dh[j] * xhat[r * d + j];
                    }
                    mean_dh /= static_cast<T>(d);
                    mean_dh_h /= static_cast<T>(d);
                    for (std::size_t j = 0; j < d; ++j) {
                        gx[r * d + j] += inv_std[r] * (dh[j] - mean_dh - xhat[r * d + j] * mean_dh_h);
                    }
                }
            }
        });
}

namespace detail {

template <typename T>
void softmax_row(const T* in, T* out, std::size_t n) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, in[j]);
    T s = 0;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = std::exp(in[j] - mx);
        s += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= s;
}

}  // namespace detail

/// Softmax over the last axis.
template <typename T>
Var<T> softmax(Var<T> a) {
    const auto& av = a.value();
    const std::size_t n = av.cols();
    BasicTensor<T> out(av.shape());
    for (std::size_t r = 0; r < av.rows(); ++r) detail::softmax_row(av.data() + r * n, out.data() + r * n, n);
    return a.graph->record(std::move(out), {a.id}, [n](Graph<T>& g, std::size_t self) {
        const auto& y = g.value(self);
        const auto& gc = g.grad_buffer(self);
        auto& ga = g.grad_buffer(g.inputs(self)[0]);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            T dot = 0;
            for (std::size_t j = 0; j < n; ++j) dot += gc[r * n + j] * y[r * n + j];
            for (std::size_t j = 0; j < n; ++j) ga[r * n + j] += y[r * n + j] * (gc[r * n + j] - dot);
        }
    });
}

/// Mean cross-entropy of logits [B, C] against integer labels, through a
/// max-subtracted log-sum-exp.
template <typename T>
Var<T> cross_entropy(Var<T> logits, std::span<const int> labels) {
    const auto& lv = logits.value();
    if (lv.rank() != 2 || static_cast<std::size_t>(lv.dim(0)) != labels.size()) {
        fail(ErrorKind::Shape, "cross_entropy: logits " + shape_str(lv.shape()) + " vs " +
                                   std::to_string(labels.size()) + " labels");
    }
    const std::size_t b = lv.rows();
    const std::size_t c = lv.cols();
    BasicTensor<T> probs(lv.shape());
    double total = 0;
    for (std::size_t r = 0; r < b; ++r) {
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= c) {
            fail(ErrorKind::Index, "cross_entropy: label " + std::to_string(y) + " out of range for " +
                                       std::to_string(c) + " classes");
        }
        const T* row = lv.data() + r * c;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, row[j]);
        T s = 0;
        for (std::size_t j = 0; j < c; ++j) s += std::exp(row[j] - mx);
        const T lse = mx + std::log(s);
        total += static_cast<double>(lse - row[y]);
        for (std::size_t j = 0; j < c; ++j) probs[r * c + j] = std::exp(row[j] - lse);
    }
    const T loss = static_cast<T>(total / static_cast<double>(b));
    std::vector<int> ys(labels.begin(), labels.end());
    return logits.graph->record(
        BasicTensor<T>({}, {loss}), {logits.id},
        [probs = std::move(probs), ys = std::move(ys), b, c](Graph<T>& g, std::size_t self) {
            const T gs = g.grad_buffer(self)[0] / static_cast<T>(b);
            auto& gl = g.grad_buffer(g.inputs(self)[0]);
            for (std::size_t r = 0; r < b; ++r) {
                for (std::size_t j = 0; j < c; ++j) {
                    const T onehot = static_cast<int>(j) == ys[r] ? T(1) : T(0);
                    gl[r * c + j] += gs * (probs[r * c + j] - onehot);
                }
            }
        });
}

/// Concatenation along `axis`; all other dimensions must agree.
template <typename T>
Var<T> concat(Var<T> a, Var<T> b, int axis = -1) {
    detail::require_same_graph(a.graph, b.graph, "concat");
    const auto& av = a.value();
    const auto& bv = b.value();
    bool ok = av.rank() == bv.rank() && av.rank() > 0;
    const int ax = ok ? detail::norm_axis(axis, av.rank(), "concat") : 0;
    for (int i = 0; ok && i < av.rank(); ++i) ok = i == ax || av.dim(i) == bv.dim(i);
    if (!ok) fail(ErrorKind::Shape, "concat: incompatible shapes " + shape_str(av.shape()) + " and " + shape_str(bv.shape()));
    const auto sa = detail::split_at(av.shape(), ax);
    const auto sb = detail::split_at(bv.shape(), ax);
    Shape out_shape = av.shape();
    out_shape[static_cast<std::size_t>(ax)] += bv.dim(ax);
    BasicTensor<T> out(out_shape);
    const std::size_t ca = sa.len * sa.inner;
    const std::size_t cb = sb.len * sb.inner;
    for (std::size_t o = 0; o < sa.outer; ++o) {
        std::copy_n(av.data() + o * ca, ca, out.data() + o * (ca + cb));
        std::copy_n(bv.data() + o * cb, cb, out.data() + o * (ca + cb) + ca);
    }
    return a.graph->record(std::move(out), {a.id, b.id}, [outer = sa.outer, ca, cb](Graph<T>& g, std::size_t self) {
        const auto ia = g.inputs(self)[0];
        const auto ib = g.inputs(self)[1];
        const auto& gc = g.grad_buffer(self);
        if (g.requires_grad(ia)) {
            auto& ga = g.grad_buffer(ia);
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t j = 0; j < ca; ++j) ga[o * ca + j] += gc[o * (ca + cb) + j];
            }
        }
        if (g.requires_grad(ib)) {
            auto& gb = g.grad_buffer(ib);
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t j = 0; j < cb; ++j) gb[o * cb + j] += gc[o * (ca + cb) + ca + j];
            }
        }
    });
}

/// Half-open range [begin, end) along `axis`.
template <typename T>
Var<T> slice(Var<T> a, int axis, int begin, int end) {
    const auto& av = a.value();
    const int ax = detail::norm_axis(axis, av.rank(), "slice");
    if (begin < 0 || end < begin || end > av.dim(ax)) {
        fail(ErrorKind::Index, "slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                                   ") invalid for axis of length " + std::to_string(av.dim(ax)));
    }
    const auto s = detail::split_at(av.shape(), ax);
    Shape out_shape = av.shape();
    out_shape[static_cast<std::size_t>(ax)] = end - begin;
    BasicTensor<T> out(out_shape);
    const std::size_t width = static_cast<std::size_t>(end - begin) * s.inner;
    const std::size_t offset = static_cast<std::size_t>(begin) * s.inner;
    const std::size_t stride = s.len * s.inner;
    for (std::size_t o = 0; o < s.outer; ++o) std::copy_n(av.data() + o * stride + offset, width, out.data() + o * width);
    return a.graph->record(std::move(out), {a.id}, [outer = s.outer, width, offset, stride](Graph<T>& g, std::size_t self) {
        const auto& gc = g.grad_buffer(self);
        auto& ga = g.grad_buffer(g.inputs(self)[0]);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t j = 0; j < width; ++j) ga[o * stride + offset + j] += gc[o * width + j];
        }
    });
}

/// Multi-head scaled dot-product self-attention core over [B, S, d] inputs
/// (already projected). Scores are scaled by 1/sqrt(d / heads); no mask.
template <typename T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, int heads) {
    detail::require_same_graph(q.graph, k.graph, "attention");
    detail::require_same_graph(q.graph, v.graph, "attention");
    const auto& qv = q.value();
    if (qv.rank() != 3 || k.value().shape() != qv.shape() || v.value().shape() != qv.shape() || heads <= 0 ||
        qv.dim(2) % heads != 0) {
        fail(ErrorKind::Shape, "attention: q/k/v shapes " + shape_str(qv.shape()) + ", " + shape_str(k.value().shape()) +
                                   ", " + shape_str(v.value().shape()) + " with " + std::to_string(heads) + " heads");
    }
    const auto batch = static_cast<std::size_t>(qv.dim(0));
    const auto seq = static_cast<std::size_t>(qv.dim(1));
    const auto d = static_cast<std::size_t>(qv.dim(2));
    const auto hn = static_cast<std::size_t>(heads);
    const std::size_t dh = d / hn;
    const T sc = T(1) / std::sqrt(static_cast<T>(dh));
    const auto& kv = k.value();
    const auto& vv = v.value();

    BasicTensor<T> out(qv.shape());
    std::vector<T> probs(batch * hn * seq * seq);
    std::vector<T> scores(seq);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t h = 0; h < hn; ++h) {
            for (std::size_t i = 0; i < seq; ++i) {
                const T* qi = qv.data() + (b * seq + i) * d + h * dh;
                for (std::size_t j = 0; j < seq; ++j) {
                    const T* kj = kv.data() + (b * seq + j) * d + h * dh;
                    T s = 0;
                    for (std::size_t t = 0; t < dh; ++t) s += qi[t] * kj[t];
                    scores[j] = s * sc;
                }
                T* p = probs.data() + ((b * hn + h) * seq + i) * seq;
                detail::softmax_row(scores.data(), p, seq);
                T* oi = out.data() + (b * seq + i) * d + h * dh;
                for (std::size_t j = 0; j < seq; ++j) {
                    const T* vj = vv.data() + (b * seq + j) * d + h * dh;
                    for (std::size_t t = 0; t < dh; ++t) oi[t] += p[j] * vj[t];
                }
            }
        }
    }
    return q.graph->record(
        std::move(out), {q.id, k.id, v.id},
        [probs = std::move(probs), batch, seq, d, hn, dh, sc](Graph<T>& g, std::size_t self) {
            const auto iq = g.inputs(self)[0];
            const auto ik = g.inputs(self)[1];
            const auto iv = g.inputs(self)[2];
            const auto& gc = g.grad_buffer(self);
            const auto& qv = g.value(iq);
            const auto& kv = g.value(ik);
            const auto& vv = g.value(iv);
            T* gq = g.requires_grad(iq) ? g.grad_buffer(iq).data() : nullptr;
            T* gk = g.requires_grad(ik) ? g.grad_buffer(ik).data() : nullptr;
            T* gv = g.requires_grad(iv) ? g.grad_buffer(iv).data() : nullptr;
            std::vector<T> dp(seq);
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t h = 0; h < hn; ++h) {
                    for (std::size_t i = 0; i < seq; ++i) {
                        const T* p = probs.data() + ((b * hn + h) * seq + i) * seq;
                        const T* go = gc.data() + (b * seq + i) * d + h * dh;
                        T dot = 0;
                        for (std::size_t j = 0; j < seq; ++j) {
                            const T* vj = vv.data() + (b * seq + j) * d + h * dh;
                            T s = 0;
                            for (std::size_t t = 0; t < dh; ++t) s += go[t] * vj[t];
                            dp[j] = s;
                            dot += p[j] * s;
                            if (gv) {
                                T* gvj = gv + (b * seq + j) * d + h * dh;
                                for (std::size_t t = 0; t < dh; ++t) gvj[t] += p[j] * go[t];
                            }
                        }
                        const T* qi = qv.data() + (b * seq + i) * d + h * dh;
                        for (std::size_t j = 0; j < seq; ++j) {
                            const T ds = p[j] * (dp[j] - dot) * sc;
                            const T* kj = kv.data() + (b * seq + j) * d + h * dh;
                            if (gq) {
                                T* gqi = gq + (b * seq + i) * d + h * dh;
                                for (std::size_t t = 0; t < dh; ++t) gqi[t] += ds * kj[t];
                            }
                            if (gk) {
                                T* gkj = gk + (b * seq + j) * d + h * dh;
                                for (std::size_t t = 0; t < dh; ++t) gkj[t] += ds * qi[t];
                            }
                        }
                    }
                }
            }
        });
}

}  // namespace groktopo::ops
