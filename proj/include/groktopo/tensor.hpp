#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "groktopo/error.hpp"

namespace groktopo {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

/// Dense row-major tensor. Float for training, double for analysis and for
/// precision-sensitive checks of the autodiff engine.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;

    explicit BasicTensor(Shape shape) : shape_(std::move(shape)), values_(shape_numel(shape_), T{0}) { check_dims(); }

    BasicTensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), values_(std::move(values)) {
        check_dims();
        if (values_.size() != shape_numel(shape_)) {
            fail(ErrorKind::Shape, "tensor of shape " + shape_str(shape_) + " given " + std::to_string(values_.size()) +
                                       " values");
        }
    }

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis < 0 ? axis + rank() : axis)); }
    std::size_t numel() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    T* data() { return values_.data(); }
    const T* data() const { return values_.data(); }
    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }
    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    /// Row count when viewed as a matrix over the last axis.
    std::size_t rows() const { return shape_.empty() ? 1 : numel() / static_cast<std::size_t>(shape_.back()); }
    std::size_t cols() const { return shape_.empty() ? 1 : static_cast<std::size_t>(shape_.back()); }

    BasicTensor reshaped(Shape shape) const {
        if (shape_numel(shape) != numel()) {
            fail(ErrorKind::Shape, "cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
        }
        return BasicTensor(std::move(shape), values_);
    }

    template <typename U>
    BasicTensor<U> cast() const {
        return BasicTensor<U>(shape_, std::vector<U>(values_.begin(), values_.end()));
    }

    bool all_finite() const {
        for (T v : values_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    void fill(T v) { std::fill(values_.begin(), values_.end(), v); }

    friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

private:
    void check_dims() const {
        for (int d : shape_) {
            if (d < 0) fail(ErrorKind::Shape, "negative dimension in shape " + shape_str(shape_));
        }
    }

    Shape shape_;
    std::vector<T> values_;
};

using Tensor = BasicTensor<float>;

template <typename T>
class Graph;

/// Handle to a node of a Graph.
template <typename T>
struct Var {
    Graph<T>* graph = nullptr;
    std::size_t id = 0;

    const BasicTensor<T>& value() const { return graph->value(id); }
    const Shape& shape() const { return value().shape(); }
};

/// Define-by-run tape. Nodes are appended in creation order, so inputs always
/// precede the nodes that consume them and reverse creation order is a valid
/// topological order for the backward sweep.
template <typename T>
class Graph {
public:
    using TensorT = BasicTensor<T>;
    /// Local backward rule: reads the node's accumulated gradient and adds
    /// into the gradients of its inputs.
    using BackwardFn = std::function<void(Graph&, std::size_t)>;

    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    Var<T> constant(TensorT value) { return push(std::move(value), {}, nullptr, false); }

    /// Leaf whose gradient is tracked (model parameter or test input).
    Var<T> variable(TensorT value) { return push(std::move(value), {}, nullptr, true); }

    Var<T> record(TensorT value, std::vector<std::size_t> inputs, BackwardFn backward) {
        bool needs = false;
        for (auto in : inputs) needs = needs || nodes_[in].requires_grad;
        return push(std::move(value), std::move(inputs), needs ? std::move(backward) : nullptr, needs);
    }

    const TensorT& value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }
    std::size_t size() const { return nodes_.size(); }

    /// Gradient accumulator of a node, zero-initialized on first use.
    TensorT& grad_buffer(std::size_t id) {
        auto& node = nodes_[id];
        if (!node.has_grad) {
            node.grad = TensorT(node.value.shape());
            node.has_grad = true;
        }
        return node.grad;
    }

    bool has_grad(std::size_t id) const { return nodes_[id].has_grad; }

    /// d(loss)/d(node); zeros for nodes the loss does not depend on.
    TensorT grad(Var<T> v) const {
        const auto& node = nodes_[v.id];
        return node.has_grad ? node.grad : TensorT(node.value.shape());
    }

    /// Reverse sweep from a scalar loss. Each node's rule runs at most once.
    void backward(Var<T> loss) {
        if (loss.graph != this) fail(ErrorKind::Contract, "backward: loss belongs to a different graph");
        if (value(loss.id).numel() != 1) {
            fail(ErrorKind::Contract, "backward: loss must be a scalar, got shape " + shape_str(value(loss.id).shape()));
        }
        grad_buffer(loss.id)[0] = T{1};
        visits_ = 0;
        for (std::size_t id = loss.id + 1; id-- > 0;) {
            auto& node = nodes_[id];
            if (!node.has_grad || !node.backward) continue;
            ++visits_;
            node.backward(*this, id);
        }
    }

    /// Number of backward rules executed by the last backward() call.
    std::size_t backward_visits() const { return visits_; }

private:
    struct Node {
        TensorT value;
        TensorT grad;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        bool requires_grad = false;
        bool has_grad = false;
    };

    Var<T> push(TensorT value, std::vector<std::size_t> inputs, BackwardFn backward, bool requires_grad) {
        nodes_.push_back(Node{std::move(value), TensorT{}, std::move(inputs), std::move(backward), requires_grad, false});
        return Var<T>{this, nodes_.size() - 1};
    }

    std::vector<Node> nodes_;
    std::size_t visits_ = 0;
};

}  // namespace groktopo
