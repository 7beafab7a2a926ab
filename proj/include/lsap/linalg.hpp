#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lsap/tensor.hpp"

namespace lsap {

struct LeastSquaresSolution {
    std::vector<double> x;
    double residual = 0.0;  // ||A x - b||_2
    std::size_t rank = 0;
};

// Minimum-norm solution of min_x ||A x - b||_2 for A of shape [m, n], any m, n
// and any rank. Uses a complete orthogonal decomposition: Householder QR with
// column pivoting of A, then an unpivoted QR of the leading rank rows of R
// transposed. Rank is decided by |R_ii| > tol * |R_00| with
// tol = 10 * max(m, n) * machine epsilon unless rank_tol > 0 is given.
LeastSquaresSolution solve_least_squares(const Tensor& a, std::span<const double> b,
                                         double rank_tol = 0.0);

}  // namespace lsap
