#pragma once

#include <cstddef>
#include <functional>

#include "lsap/tape.hpp"

namespace lsap {

// A scalar-valued function built on a tape from a single input leaf.
using ScalarFn = std::function<Var(Tape&, Var)>;

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    Tensor analytic;
    Tensor numeric;
};

// Compares the tape gradient of f at x with central differences of step h.
// Error per component is |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
// Throws NumericError if f(x) is not finite.
GradCheckResult grad_check_detailed(const ScalarFn& f, const Tensor& x, double h = 1e-6);
double grad_check(const ScalarFn& f, const Tensor& x, double h = 1e-6);

// Evaluates f at x and returns its value and gradient.
double value_and_grad(const ScalarFn& f, const Tensor& x, Tensor& grad);
double value_only(const ScalarFn& f, const Tensor& x);

}  // namespace lsap
