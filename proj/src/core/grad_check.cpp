#include "lsap/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "lsap/error.hpp"

namespace lsap {

double value_and_grad(const ScalarFn& f, const Tensor& x, Tensor& grad) {
    Tape tape;
    Var in = tape.leaf(x);
    Var out = f(tape, in);
    if (out.value().numel() != 1) throw ShapeError("grad_check: function is not scalar");
    double v = out.value()[0];
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite f(x)");
    tape.backward(out);
    grad = tape.grad(in);
    return v;
}

double value_only(const ScalarFn& f, const Tensor& x) {
    Tape tape;
    Var out = f(tape, tape.leaf(x));
    double v = out.value().item();
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite f(x)");
    return v;
}

GradCheckResult grad_check_detailed(const ScalarFn& f, const Tensor& x, double h) {
    if (!(h > 0.0)) throw Error("grad_check: step must be positive");
    GradCheckResult r;
    value_and_grad(f, x, r.analytic);
    r.numeric = Tensor(x.shape());
    Tensor probe = x;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + h;
        const double fp = value_only(f, probe);
        probe[i] = orig - h;
        const double fm = value_only(f, probe);
        probe[i] = orig;
        r.numeric[i] = (fp - fm) / (2.0 * h);

        const double a = r.analytic[i];
        const double n = r.numeric[i];
        const double denom = std::max({std::abs(a), std::abs(n), 1e-12});
        const double err = std::abs(a - n) / denom;
        if (i == 0 || err > r.max_relative_error) {
            r.max_relative_error = err;
            r.worst_index = i;
        }
    }
    return r;
}

double grad_check(const ScalarFn& f, const Tensor& x, double h) {
    return grad_check_detailed(f, x, h).max_relative_error;
}

}  // namespace lsap
