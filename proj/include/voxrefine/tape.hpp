#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "voxrefine/tensor.hpp"

namespace voxrefine::num {

struct Parameter;
class Tape;

/// Handle to a node on a Tape.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    const Tensor& value() const;
    /// Gradient after Tape::backward; zeros if the node received none.
    const Tensor& grad() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t dim(std::size_t i) const { return value().dim(i); }

    Tape* tape() const noexcept { return tape_; }
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order; backward()
/// replays their pullbacks in reverse. A tape built with record = false
/// evaluates values only.
class Tape {
public:
    explicit Tape(bool record = true) : record_(record) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const noexcept { return record_; }

    /// Non-differentiable input.
    Var constant(Tensor value);
    /// Differentiable input whose gradient is read back through Var::grad().
    Var leaf(Tensor value);
    /// Differentiable view of a parameter; backward() accumulates into p.grad.
    Var param(Parameter& p);

    /// Seeds d(loss)/d(loss) = 1 and runs every pullback. `loss` must hold a
    /// single element.
    void backward(Var loss);

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    /// Gradient buffer of a node, allocated (zero) on first access.
    Tensor& grad(std::size_t id);
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    std::size_t size() const noexcept { return nodes_.size(); }

    using Pullback = std::function<void(Tape&, const Tensor& out_grad)>;

    /// Record an op result. `op` names the op in error messages; the value is
    /// checked for NaN/Inf. The pullback is dropped when no input needs a
    /// gradient or the tape is not recording.
    Var push(const char* op, Tensor value, std::initializer_list<Var> inputs, Pullback pullback);
    Var push(const char* op, Tensor value, const std::vector<Var>& inputs, Pullback pullback);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        Pullback pullback;
        Parameter* param = nullptr;
        bool requires_grad = false;
    };

    Var push_node(const char* op, Tensor value, bool needs_grad, Pullback pullback);

    std::deque<Node> nodes_;
    bool record_;
};

// ---- ops -------------------------------------------------------------------

/// [m,k] x [k,n] -> [m,n]
Var matmul(Var a, Var b);
/// x[L,in] w[in,out] + b[out]; `b` may be invalid (no bias).
Var linear(Var x, Var w, Var b = {});
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// x[L,C] + r[C] broadcast over rows.
Var add_row(Var x, Var r);

Var gelu(Var x);
Var silu(Var x);
Var sigmoid(Var x);

/// Shifted-exponent softmax along `axis`.
Var softmax(Var x, std::size_t axis);
/// Normalization over the last axis, optional affine (gain/bias [C]).
Var layernorm(Var x, Var gain = {}, Var bias = {}, double eps = 1e-5);

/// Scaled dot-product attention over [H, L, d] tensors. If `map_out` is
/// given it receives softmax(QK^T / sqrt(d)) of shape [H, Lq, Lkv].
Var attention(Var q, Var k, Var v, Tensor* map_out = nullptr);
/// [L, H*d] -> [H, L, d]
Var split_heads(Var x, std::size_t heads);
/// [H, L, d] -> [L, H*d]
Var merge_heads(Var x);

/// Rotate channel pairs (2i, 2i+1) of x[L, C] by phases[L, C/2].
Var rope_rotate(Var x, const Tensor& phases);

/// Concatenate rank-2 tensors along rows.
Var concat_rows(const std::vector<Var>& parts);
/// Rows [begin, end) of a rank-2 tensor.
Var slice_rows(Var x, std::size_t begin, std::size_t end);

Var sum(Var x);
Var mean(Var x);
/// mean((a - target)^2)
Var mse(Var a, Var target);
/// sum(x * w) for a constant weight tensor.
Var weighted_sum(Var x, const Tensor& w);

/// [dim] vector (cos(value*f_0..f_{dim/2-1}), sin(...)) with geometric
/// frequencies f_i = max_period^(-i/(dim/2)).
Tensor sinusoidal_embedding(double value, std::size_t dim, double max_period = 10000.0);

}  // namespace voxrefine::num
