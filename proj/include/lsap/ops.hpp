#pragma once

#include <cstddef>
#include <vector>

#include "lsap/tape.hpp"

// Differentiable primitives. Every op records its output on the tape of its
// first argument together with a vector-Jacobian rule. Shape mismatches throw
// ShapeError before anything is recorded.
namespace lsap::ops {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var square(Var a);
Var abs(Var a);
Var leaky_relu(Var a, double slope = 0.2);

// Reductions to a rank-0 scalar.
Var sum(Var a);
Var mean(Var a);
Var dot(Var a, Var b);
Var l2_norm(Var a);

// x / s for a scalar s.
Var div_scalar(Var x, Var s);
// x / ||x||_2; throws NumericError on a zero vector.
Var normalize(Var x);

// [m,n] x [n,p] -> [m,p]
Var matmul(Var a, Var b);
// [m,n] x [n] -> [m]
Var matvec(Var a, Var x);
// x[C, ...] + b[C], broadcast over trailing axes.
Var bias_add(Var x, Var b);

// x[C,H,W] (*) w[O,C,3,3], stride 1, zero padding 1, no bias.
Var conv2d_3x3(Var x, Var w);
Var upsample_nearest_2x(Var x);
Var avg_pool_2x(Var x);

// w[O,I,...] with every input slice i scaled by s[i].
Var modulate(Var w, Var s);
// Each output slice o divided by sqrt(sum of its squares + eps).
Var demodulate(Var w, double eps);

Var reshape(Var x, Shape shape);
// Row i of a rank-2 tensor.
Var row(Var x, std::size_t i);
Var slice(Var x, std::size_t offset, std::size_t length);
Var stack_rows(const std::vector<Var>& rows);

Var mse(Var a, Var b);
Var mean_abs_error(Var a, Var b);

}  // namespace lsap::ops
