#include "lsap/tape.hpp"

#include <string>

#include "lsap/error.hpp"

namespace lsap {

const Tensor& Var::value() const {
    if (!tape_) throw Error("access through an empty Var");
    return tape_->value(*this);
}

bool Var::requires_grad() const { return tape_ && tape_->requires_grad(*this); }

void Tape::check_owned(Var v) const {
    if (v.tape() != this || v.id() >= nodes_.size()) {
        throw Error("Var does not belong to this tape");
    }
}

Var Tape::leaf(Tensor value) {
    if (!value.all_finite()) throw NumericError("non-finite leaf value");
    nodes_.push_back(Node{std::move(value), {}, false, true, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    if (!value.all_finite()) throw NumericError("non-finite constant value");
    nodes_.push_back(Node{std::move(value), {}, false, false, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(std::string_view op, Tensor value, const std::vector<Var>& inputs,
                 Adjoint adjoint) {
    bool needs = false;
    for (const auto& in : inputs) {
        check_owned(in);
        needs = needs || nodes_[in.id()].requires_grad;
    }
    if (!value.all_finite()) {
        throw NumericError("non-finite value produced by " + std::string(op));
    }
    nodes_.push_back(Node{std::move(value), {}, false, needs, needs ? std::move(adjoint) : Adjoint{}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(std::string_view op, Tensor value, std::initializer_list<Var> inputs,
                 Adjoint adjoint) {
    return record(op, std::move(value), std::vector<Var>(inputs), std::move(adjoint));
}

Tensor& Tape::grad_buffer(Var v) {
    auto& node = nodes_[v.id()];
    if (!node.has_grad) {
        node.grad = Tensor(node.value.shape());
        node.has_grad = true;
    }
    return node.grad;
}

void Tape::accumulate(Var v, const Tensor& g) {
    if (!requires_grad(v)) return;
    auto& buf = grad_buffer(v);
    if (buf.shape() != g.shape()) {
        throw ShapeError("gradient shape " + shape_string(g.shape()) + " does not match value " +
                         shape_string(buf.shape()));
    }
    for (std::size_t i = 0; i < g.numel(); ++i) buf[i] += g[i];
}

void Tape::backward(Var root) {
    check_owned(root);
    if (nodes_[root.id()].value.numel() != 1) {
        throw ShapeError("backward root must be a scalar, got " +
                         shape_string(nodes_[root.id()].value.shape()));
    }
    if (!nodes_[root.id()].requires_grad) {
        throw Error("backward on a value that depends on no gradient leaf");
    }
    for (auto& n : nodes_) {
        n.has_grad = false;
        n.grad = Tensor();
    }
    grad_buffer(root)[0] = 1.0;
    for (std::size_t i = root.id() + 1; i-- > 0;) {
        auto& node = nodes_[i];
        if (!node.has_grad || !node.adjoint) continue;
        node.adjoint(*this, node.grad);
    }
}

Tensor Tape::grad(Var v) const {
    check_owned(v);
    const auto& node = nodes_[v.id()];
    if (!node.has_grad) return Tensor(node.value.shape());
    return node.grad;
}

}  // namespace lsap
