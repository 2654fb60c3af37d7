#include "voxrefine/tape.hpp"

#include <string>

#include "voxrefine/error.hpp"
#include "voxrefine/params.hpp"

namespace voxrefine::num {

const Tensor& Var::value() const {
    if (!tape_) throw ValidationError("Var: use of an empty handle");
    return tape_->value(id_);
}

const Tensor& Var::grad() const {
    if (!tape_) throw ValidationError("Var: use of an empty handle");
    return tape_->grad(id_);
}

Tensor& Tape::grad(std::size_t id) {
    auto& n = nodes_[id];
    if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.shape());
    return n.grad;
}

Var Tape::push_node(const char* op, Tensor value, bool needs_grad, Pullback pullback) {
    if (!value.all_finite()) throw NumericError(std::string(op) + ": non-finite value " + shape_str(value.shape()));
    Node n;
    n.value = std::move(value);
    n.requires_grad = needs_grad && record_;
    if (n.requires_grad) n.pullback = std::move(pullback);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return push_node("constant", std::move(value), false, {}); }

Var Tape::leaf(Tensor value) { return push_node("leaf", std::move(value), true, {}); }

Var Tape::param(Parameter& p) {
    Var v = push_node("param", p.value, true, {});
    nodes_[v.id()].param = &p;
    return v;
}

Var Tape::push(const char* op, Tensor value, std::initializer_list<Var> inputs, Pullback pullback) {
    bool needs = false;
    for (const Var& in : inputs) {
        if (in.valid() && in.tape() != this) throw ValidationError(std::string(op) + ": input from another tape");
        if (in.valid() && nodes_[in.id()].requires_grad) needs = true;
    }
    return push_node(op, std::move(value), needs, std::move(pullback));
}

Var Tape::push(const char* op, Tensor value, const std::vector<Var>& inputs, Pullback pullback) {
    bool needs = false;
    for (const Var& in : inputs) {
        if (in.valid() && in.tape() != this) throw ValidationError(std::string(op) + ": input from another tape");
        if (in.valid() && nodes_[in.id()].requires_grad) needs = true;
    }
    return push_node(op, std::move(value), needs, std::move(pullback));
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw ValidationError("backward: loss belongs to another tape");
    if (!record_) throw ValidationError("backward: tape is not recording");
    if (nodes_[loss.id()].value.numel() != 1) throw ValidationError("backward: loss must be a single element");
    grad(loss.id()).fill(1.0);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.empty()) continue;
        if (!n.grad.all_finite()) throw NumericError("backward: non-finite gradient at node " + std::to_string(i));
        if (n.pullback) n.pullback(*this, n.grad);
        if (n.param) {
            Parameter& p = *n.param;
            if (!p.grad.same_shape(p.value)) p.grad = Tensor(p.value.shape());
            for (std::size_t j = 0; j < n.grad.numel(); ++j) p.grad[j] += n.grad[j];
        }
    }
}

}  // namespace voxrefine::num
