#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string_view>
#include <vector>

#include "lsap/tensor.hpp"

namespace lsap {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    bool requires_grad() const;
    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Reverse-mode record. Nodes are appended in evaluation order; backward()
// walks them in reverse, each node's adjoint rule accumulating into the
// gradient buffers of its inputs. A tape has a single owner and must not be
// shared while recording.
class Tape {
public:
    // Receives the gradient of the output and accumulates into its inputs.
    using Adjoint = std::function<void(Tape&, const Tensor& grad_out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value);
    Var constant(Tensor value);

    // Records an op output. The adjoint is dropped when no input needs a gradient.
    // Throws NumericError if the value contains NaN/Inf.
    Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs,
               Adjoint adjoint);
    Var record(std::string_view op, Tensor value, const std::vector<Var>& inputs,
               Adjoint adjoint);

    // Seeds d(root)/d(root) = 1 and propagates. Root must hold a single element.
    void backward(Var root);

    const Tensor& value(Var v) const { return nodes_[v.id()].value; }
    bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

    // Gradient of the last backward() root with respect to v (zeros if unreached).
    Tensor grad(Var v) const;

    // Mutable gradient buffer, zero-initialised on first use.
    Tensor& grad_buffer(Var v);
    void accumulate(Var v, const Tensor& g);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool has_grad = false;
        bool requires_grad = false;
        Adjoint adjoint;
    };

    void check_owned(Var v) const;

    std::deque<Node> nodes_;
};

}  // namespace lsap
