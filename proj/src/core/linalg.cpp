#include "lsap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lsap/error.hpp"

namespace lsap {

namespace {

// Row-major dense matrix used only inside the solver.
struct Dense {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Dense(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct Reflector {
    std::size_t start = 0;    // first row it acts on
    std::vector<double> v;    // acts on rows [start, start + v.size())
    double beta = 0.0;        // H = I - beta v v^T
};

// Builds the reflector zeroing m(start+1.., col) and applies it to columns >= col.
Reflector reflect_column(Dense& m, std::size_t start, std::size_t col) {
    Reflector h;
    h.start = start;
    const std::size_t len = m.rows - start;
    h.v.resize(len);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        h.v[i] = m(start + i, col);
        norm2 += h.v[i] * h.v[i];
    }
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) return h;  // beta = 0: identity
    const double alpha = h.v[0] > 0.0 ? -norm : norm;
    h.v[0] -= alpha;
    const double vtv = std::inner_product(h.v.begin(), h.v.end(), h.v.begin(), 0.0);
    if (vtv == 0.0) return h;
    h.beta = 2.0 / vtv;
    for (std::size_t j = col; j < m.cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += h.v[i] * m(start + i, j);
        s *= h.beta;
        for (std::size_t i = 0; i < len; ++i) m(start + i, j) -= s * h.v[i];
    }
    return h;
}

void reflect(const Reflector& h, std::vector<double>& x) {
    if (h.beta == 0.0) return;
    double s = 0.0;
    for (std::size_t i = 0; i < h.v.size(); ++i) s += h.v[i] * x[h.start + i];
    s *= h.beta;
    for (std::size_t i = 0; i < h.v.size(); ++i) x[h.start + i] -= s * h.v[i];
}

}  // namespace

LeastSquaresSolution solve_least_squares(const Tensor& a, std::span<const double> b,
                                         double rank_tol) {
    if (a.rank() != 2) throw ShapeError("solve_least_squares: matrix must be rank 2");
    const std::size_t m = a.dim(0), n = a.dim(1);
    if (b.size() != m) throw ShapeError("solve_least_squares: rhs length mismatch");
    for (double v : b) {
        if (!std::isfinite(v)) throw NumericError("solve_least_squares: non-finite rhs");
    }

    Dense r(m, n);
    std::copy(a.data().begin(), a.data().end(), r.a.begin());
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> colnorm(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) colnorm[j] += r(i, j) * r(i, j);

    // Stage 1: A P = Q R with column pivoting.
    std::vector<Reflector> q;
    const std::size_t steps = std::min(m, n);
    for (std::size_t k = 0; k < steps; ++k) {
        std::size_t best = k;
        for (std::size_t j = k + 1; j < n; ++j)
            if (colnorm[j] > colnorm[best]) best = j;
        if (best != k) {
            for (std::size_t i = 0; i < m; ++i) std::swap(r(i, k), r(i, best));
            std::swap(perm[k], perm[best]);
            std::swap(colnorm[k], colnorm[best]);
        }
        q.push_back(reflect_column(r, k, k));
        // Recompute trailing column norms exactly; the matrices here are small.
        for (std::size_t j = k + 1; j < n; ++j) {
            colnorm[j] = 0.0;
            for (std::size_t i = k + 1; i < m; ++i) colnorm[j] += r(i, j) * r(i, j);
        }
    }

    const double tol = rank_tol > 0.0
                           ? rank_tol
                           : 10.0 * static_cast<double>(std::max(m, n)) *
                                 std::numeric_limits<double>::epsilon();
    std::size_t rank = 0;
    const double r00 = steps > 0 ? std::abs(r(0, 0)) : 0.0;
    while (rank < steps && r00 > 0.0 && std::abs(r(rank, rank)) > tol * r00) ++rank;

    LeastSquaresSolution out;
    out.rank = rank;
    out.x.assign(n, 0.0);

    if (rank > 0) {
        std::vector<double> c(b.begin(), b.end());
        for (const auto& h : q) reflect(h, c);

        // Stage 2: the leading rank rows M = R[0:rank, :] satisfy M^T = Z [T; 0].
        Dense mt(n, rank);
        for (std::size_t i = 0; i < rank; ++i)
            for (std::size_t j = 0; j < n; ++j) mt(j, i) = (j >= i) ? r(i, j) : 0.0;
        std::vector<Reflector> z;
        for (std::size_t k = 0; k < rank; ++k) z.push_back(reflect_column(mt, k, k));

        // M x = c[0:rank]  <=>  T^T u = c[0:rank] with x = Z [u; 0].
        std::vector<double> u(n, 0.0);
        for (std::size_t i = 0; i < rank; ++i) {
            double s = c[i];
            for (std::size_t j = 0; j < i; ++j) s -= mt(j, i) * u[j];
            u[i] = s / mt(i, i);
        }
        for (std::size_t k = z.size(); k-- > 0;) reflect(z[k], u);
        for (std::size_t j = 0; j < n; ++j) out.x[perm[j]] = u[j];
    }

    double res2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double s = -b[i];
        for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * out.x[j];
        res2 += s * s;
    }
    out.residual = std::sqrt(res2);
    return out;
}

}  // namespace lsap
