#include "lsap/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsap/error.hpp"

namespace lsap::ops {

namespace {

Tape& tape_of(Var a) {
    if (!a.valid()) throw Error("op applied to an empty Var");
    return *a.tape();
}

void same_tape(Var a, Var b) {
    if (a.tape() != b.tape()) throw Error("op inputs recorded on different tapes");
}

void same_shape(const char* op, Var a, Var b) {
    same_tape(a, b);
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    }
}

void expect_rank(const char* op, Var a, std::size_t rank) {
    if (a.shape().size() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(a.shape()));
    }
}

template <class F>
Tensor map(const Tensor& a, F f) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = f(a[i]);
    return out;
}

}  // namespace

Var add(Var a, Var b) {
    same_shape("add", a, b);
    const auto& av = a.value();
    const auto& bv = b.value();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] + bv[i];
    return tape_of(a).record("add", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Var sub(Var a, Var b) {
    same_shape("sub", a, b);
    const auto& av = a.value();
    const auto& bv = b.value();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] - bv[i];
    return tape_of(a).record("sub", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a, g);
        if (t.requires_grad(b)) {
            auto& gb = t.grad_buffer(b);
            for (std::size_t i = 0; i < g.numel(); ++i) gb[i] -= g[i];
        }
    });
}

Var mul(Var a, Var b) {
    same_shape("mul", a, b);
    const auto& av = a.value();
    const auto& bv = b.value();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] * bv[i];
    return tape_of(a).record("mul", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
        const auto& av = t.value(a);
        const auto& bv = t.value(b);
        if (t.requires_grad(a)) {
            auto& ga = t.grad_buffer(a);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * bv[i];
        }
        if (t.requires_grad(b)) {
            auto& gb = t.grad_buffer(b);
            for (std::size_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Var scale(Var a, double c) {
    Tensor out = map(a.value(), [c](double v) { return c * v; });
    return tape_of(a).record("scale", std::move(out), {a}, [a, c](Tape& t, const Tensor& g) {
        auto& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += c * g[i];
    });
}

Var square(Var a) {
    Tensor out = map(a.value(), [](double v) { return v * v; });
    return tape_of(a).record("square", std::move(out), {a}, [a](Tape& t, const Tensor& g) {
        const auto& av = t.value(a);
        auto& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += 2.0 * av[i] * g[i];
    });
}

Var abs(Var a) {
    Tensor out = map(a.value(), [](double v) { return std::abs(v); });
    return tape_of(a).record("abs", std::move(out), {a}, [a](Tape& t, const Tensor& g) {
        const auto& av = t.value(a);
        auto& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga[i] += av[i] > 0.0 ? g[i] : (av[i] < 0.0 ? -g[i] : 0.0);
        }
    });
}

Var leaky_relu(Var a, double slope) {
    Tensor out = map(a.value(), [slope](double v) { return v < 0.0 ? slope * v : v; });
    return tape_of(a).record("leaky_relu", std::move(out), {a},
                             [a, slope](Tape& t, const Tensor& g) {
                                 const auto& av = t.value(a);
                                 auto& ga = t.grad_buffer(a);
                                 for (std::size_t i = 0; i < g.numel(); ++i) {
                                     ga[i] += av[i] < 0.0 ? slope * g[i] : g[i];
                                 }
                             });
}

Var sum(Var a) {
    const double s = compensated_sum(a.value().data());
    return tape_of(a).record("sum", Tensor::scalar(s), {a}, [a](Tape& t, const Tensor& g) {
        auto& ga = t.grad_buffer(a);
        for (auto& v : ga.data()) v += g[0];
    });
}

Var mean(Var a) {
    const auto n = a.value().numel();
    if (n == 0) throw ShapeError("mean of empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var dot(Var a, Var b) {
    same_shape("dot", a, b);
    double s = lsap::dot(a.value().data(), b.value().data());
    return tape_of(a).record("dot", Tensor::scalar(s), {a, b}, [a, b](Tape& t, const Tensor& g) {
        const auto& av = t.value(a);
        const auto& bv = t.value(b);
        if (t.requires_grad(a)) {
            auto& ga = t.grad_buffer(a);
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g[0] * bv[i];
        }
        if (t.requires_grad(b)) {
            auto& gb = t.grad_buffer(b);
            for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += g[0] * av[i];
        }
    });
}

Var l2_norm(Var a) {
    double n = lsap::l2_norm(a.value().data());
    return tape_of(a).record("l2_norm", Tensor::scalar(n), {a}, [a](Tape& t, const Tensor& g) {
        const auto& av = t.value(a);
        double n = lsap::l2_norm(av.data());
        if (n == 0.0) return;  // subgradient 0 at the origin
        auto& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g[0] * av[i] / n;
    });
}

Var div_scalar(Var x, Var s) {
    same_tape(x, s);
    if (s.value().numel() != 1) throw ShapeError("div_scalar: divisor must be scalar");
    double d = s.value()[0];
    if (d == 0.0) throw NumericError("div_scalar: division by zero");
    Tensor out = map(x.value(), [d](double v) { return v / d; });
    return tape_of(x).record("div_scalar", std::move(out), {x, s}, [x, s](Tape& t, const Tensor& g) {
        const auto& xv = t.value(x);
        double d = t.value(s)[0];
        if (t.requires_grad(x)) {
            auto& gx = t.grad_buffer(x);
            for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i] / d;
        }
        if (t.requires_grad(s)) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.numel(); ++i) acc += g[i] * xv[i];
            t.grad_buffer(s)[0] -= acc / (d * d);
        }
    });
}

Var normalize(Var x) {
    if (lsap::l2_norm(x.value().data()) == 0.0) {
        throw NumericError("normalize: zero vector");
    }
    return div_scalar(x, l2_norm(x));
}

Var matmul(Var a, Var b) {
    same_tape(a, b);
    expect_rank("matmul", a, 2);
    expect_rank("matmul", b, 2);
    const std::size_t m = a.shape()[0], n = a.shape()[1], p = b.shape()[1];
    if (b.shape()[0] != n) {
        throw ShapeError("matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
    }
    const auto& av = a.value();
    const auto& bv = b.value();
    Tensor out(Shape{m, p});
    for (std::size_t i = 0; i < m; ++i) {
        double* orow = &out[i * p];
        for (std::size_t k = 0; k < n; ++k) {
            double aik = av[i * n + k];
            const double* brow = &bv[k * p];
            for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
        }
    }
    return tape_of(a).record("matmul", std::move(out), {a, b},
                             [a, b, m, n, p](Tape& t, const Tensor& g) {
                                 const auto& av = t.value(a);
                                 const auto& bv = t.value(b);
                                 if (t.requires_grad(a)) {
                                     auto& ga = t.grad_buffer(a);
                                     for (std::size_t i = 0; i < m; ++i)
                                         for (std::size_t k = 0; k < n; ++k) {
                                             double acc = 0.0;
                                             for (std::size_t j = 0; j < p; ++j)
                                                 acc += g[i * p + j] * bv[k * p + j];
                                             ga[i * n + k] += acc;
                                         }
                                 }
                                 if (t.requires_grad(b)) {
                                     auto& gb = t.grad_buffer(b);
                                     for (std::size_t i = 0; i < m; ++i)
                                         for (std::size_t k = 0; k < n; ++k) {
                                             double aik = av[i * n + k];
                                             for (std::size_t j = 0; j < p; ++j)
                                                 gb[k * p + j] += aik * g[i * p + j];
                                         }
                                 }
                             });
}

Var matvec(Var a, Var x) {
    same_tape(a, x);
    expect_rank("matvec", a, 2);
    expect_rank("matvec", x, 1);
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    if (x.shape()[0] != n) {
        throw ShapeError("matvec: " + shape_string(a.shape()) + " x " + shape_string(x.shape()));
    }
    const auto& av = a.value();
    const auto& xv = x.value();
    Tensor out(Shape{m});
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += av[i * n + k] * xv[k];
        out[i] = acc;
    }
    return tape_of(a).record("matvec", std::move(out), {a, x}, [a, x, m, n](Tape& t, const Tensor& g) {
        const auto& av = t.value(a);
        const auto& xv = t.value(x);
        if (t.requires_grad(a)) {
            auto& ga = t.grad_buffer(a);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t k = 0; k < n; ++k) ga[i * n + k] += g[i] * xv[k];
        }
        if (t.requires_grad(x)) {
            auto& gx = t.grad_buffer(x);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t k = 0; k < n; ++k) gx[k] += g[i] * av[i * n + k];
        }
    });
}

Var bias_add(Var x, Var b) {
    same_tape(x, b);
    expect_rank("bias_add", b, 1);
    if (x.shape().empty() || x.shape()[0] != b.shape()[0]) {
        throw ShapeError("bias_add: " + shape_string(x.shape()) + " + " + shape_string(b.shape()));
    }
    const std::size_t c = b.shape()[0];
    const std::size_t inner = x.value().numel() / c;
    Tensor out = x.value();
    const auto& bv = b.value();
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < inner; ++j) out[i * inner + j] += bv[i];
    return tape_of(x).record("bias_add", std::move(out), {x, b}, [x, b, c, inner](Tape& t, const Tensor& g) {
        t.accumulate(x, g);
        if (t.requires_grad(b)) {
            auto& gb = t.grad_buffer(b);
            for (std::size_t i = 0; i < c; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < inner; ++j) acc += g[i * inner + j];
                gb[i] += acc;
            }
        }
    });
}

namespace {

// Offsets of the valid output range for a tap displaced by d in a length-n axis.
inline std::size_t lo_of(int d) { return d < 0 ? static_cast<std::size_t>(-d) : 0; }
inline std::size_t hi_of(int d, std::size_t n) { return d > 0 ? n - static_cast<std::size_t>(d) : n; }
// Start of the source row read by output row y for vertical tap offset dy (y + dy >= 0).
inline std::size_t tap_row(std::size_t y, int dy, std::size_t W) {
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + dy) * W;
}
inline std::size_t tap_col(std::size_t x, int dx) {
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + dx);
}

}  // namespace

Var conv2d_3x3(Var x, Var w) {
    same_tape(x, w);
    expect_rank("conv2d_3x3", x, 3);
    expect_rank("conv2d_3x3", w, 4);
    const std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
    const std::size_t O = w.shape()[0];
    if (w.shape()[1] != C || w.shape()[2] != 3 || w.shape()[3] != 3) {
        throw ShapeError("conv2d_3x3: input " + shape_string(x.shape()) + " kernel " +
                         shape_string(w.shape()));
    }
    const auto& xv = x.value();
    const auto& wv = w.value();
    Tensor out(Shape{O, H, W});
    for (std::size_t o = 0; o < O; ++o) {
        double* dst = &out[o * H * W];
        for (std::size_t c = 0; c < C; ++c) {
            const double* src = &xv[c * H * W];
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const double k = wv[((o * C + c) * 3 + ky) * 3 + kx];
                    for (std::size_t y = lo_of(dy); y < hi_of(dy, H); ++y) {
                        const double* s = src + tap_row(y, dy, W);
                        double* d = dst + y * W;
                        for (std::size_t xx = lo_of(dx); xx < hi_of(dx, W); ++xx)
                            d[xx] += k * s[tap_col(xx, dx)];
                    }
                }
            }
        }
    }
    return tape_of(x).record("conv2d_3x3", std::move(out), {x, w},
                             [x, w, C, H, W, O](Tape& t, const Tensor& g) {
        const auto& xv = t.value(x);
        const auto& wv = t.value(w);
        const bool need_x = t.requires_grad(x);
        const bool need_w = t.requires_grad(w);
        Tensor* gx = need_x ? &t.grad_buffer(x) : nullptr;
        Tensor* gw = need_w ? &t.grad_buffer(w) : nullptr;
        for (std::size_t o = 0; o < O; ++o) {
            const double* go = &g[o * H * W];
            for (std::size_t c = 0; c < C; ++c) {
                const double* src = &xv[c * H * W];
                for (int ky = 0; ky < 3; ++ky) {
                    const int dy = ky - 1;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int dx = kx - 1;
                        const std::size_t widx = ((o * C + c) * 3 + ky) * 3 + kx;
                        const double k = wv[widx];
                        double acc = 0.0;
                        for (std::size_t y = lo_of(dy); y < hi_of(dy, H); ++y) {
                            const double* gr = go + y * W;
                            const std::size_t base = tap_row(y, dy, W);
                            if (need_x) {
                                double* d = &(*gx)[c * H * W] + base;
                                for (std::size_t xx = lo_of(dx); xx < hi_of(dx, W); ++xx)
                                    d[tap_col(xx, dx)] += k * gr[xx];
                            }
                            if (need_w) {
                                const double* s = src + base;
                                for (std::size_t xx = lo_of(dx); xx < hi_of(dx, W); ++xx)
                                    acc += gr[xx] * s[tap_col(xx, dx)];
                            }
                        }
                        if (need_w) (*gw)[widx] += acc;
                    }
                }
            }
        }
    });
}

Var upsample_nearest_2x(Var x) {
    expect_rank("upsample_nearest_2x", x, 3);
    const std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
    const auto& xv = x.value();
    Tensor out(Shape{C, 2 * H, 2 * W});
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t y = 0; y < 2 * H; ++y)
            for (std::size_t xx = 0; xx < 2 * W; ++xx)
                out[(c * 2 * H + y) * 2 * W + xx] = xv[(c * H + y / 2) * W + xx / 2];
    return tape_of(x).record("upsample_nearest_2x", std::move(out), {x},
                             [x, C, H, W](Tape& t, const Tensor& g) {
                                 auto& gx = t.grad_buffer(x);
                                 for (std::size_t c = 0; c < C; ++c)
                                     for (std::size_t y = 0; y < 2 * H; ++y)
                                         for (std::size_t xx = 0; xx < 2 * W; ++xx)
                                             gx[(c * H + y / 2) * W + xx / 2] +=
                                                 g[(c * 2 * H + y) * 2 * W + xx];
                             });
}

Var avg_pool_2x(Var x) {
    expect_rank("avg_pool_2x", x, 3);
    const std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
    if (H % 2 || W % 2) throw ShapeError("avg_pool_2x: odd spatial size " + shape_string(x.shape()));
    const std::size_t h = H / 2, w = W / 2;
    const auto& xv = x.value();
    Tensor out(Shape{C, h, w});
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t xx = 0; xx < w; ++xx) {
                const double* p = &xv[(c * H + 2 * y) * W + 2 * xx];
                out[(c * h + y) * w + xx] = 0.25 * (p[0] + p[1] + p[W] + p[W + 1]);
            }
    return tape_of(x).record("avg_pool_2x", std::move(out), {x}, [x, C, H, W](Tape& t, const Tensor& g) {
        const std::size_t h = H / 2, w = W / 2;
        auto& gx = t.grad_buffer(x);
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t xx = 0; xx < w; ++xx) {
                    const double q = 0.25 * g[(c * h + y) * w + xx];
                    double* p = &gx[(c * H + 2 * y) * W + 2 * xx];
                    p[0] += q;
                    p[1] += q;
                    p[W] += q;
                    p[W + 1] += q;
                }
    });
}

Var modulate(Var w, Var s) {
    same_tape(w, s);
    expect_rank("modulate", s, 1);
    if (w.shape().size() < 2 || w.shape()[1] != s.shape()[0]) {
        throw ShapeError("modulate: kernel " + shape_string(w.shape()) + " style " +
                         shape_string(s.shape()));
    }
    const std::size_t O = w.shape()[0], I = w.shape()[1];
    const std::size_t R = w.value().numel() / (O * I);
    const auto& sv = s.value();
    Tensor out = w.value();
    for (std::size_t o = 0; o < O; ++o)
        for (std::size_t i = 0; i < I; ++i)
            for (std::size_t r = 0; r < R; ++r) out[(o * I + i) * R + r] *= sv[i];
    return tape_of(w).record("modulate", std::move(out), {w, s}, [w, s, O, I, R](Tape& t, const Tensor& g) {
        const auto& wv = t.value(w);
        const auto& sv = t.value(s);
        if (t.requires_grad(w)) {
            auto& gw = t.grad_buffer(w);
            for (std::size_t o = 0; o < O; ++o)
                for (std::size_t i = 0; i < I; ++i)
                    for (std::size_t r = 0; r < R; ++r) {
                        const auto idx = (o * I + i) * R + r;
                        gw[idx] += g[idx] * sv[i];
                    }
        }
        if (t.requires_grad(s)) {
            auto& gs = t.grad_buffer(s);
            for (std::size_t o = 0; o < O; ++o)
                for (std::size_t i = 0; i < I; ++i) {
                    double acc = 0.0;
                    for (std::size_t r = 0; r < R; ++r) {
                        const auto idx = (o * I + i) * R + r;
                        acc += g[idx] * wv[idx];
                    }
                    gs[i] += acc;
                }
        }
    });
}

Var demodulate(Var w, double eps) {
    if (eps < 0.0) throw NumericError("demodulate: negative epsilon");
    if (w.shape().empty()) throw ShapeError("demodulate: scalar kernel");
    const std::size_t O = w.shape()[0];
    const std::size_t R = w.value().numel() / O;
    const auto& wv = w.value();
    Tensor out(w.shape());
    for (std::size_t o = 0; o < O; ++o) {
        double ss = eps;
        for (std::size_t r = 0; r < R; ++r) ss += wv[o * R + r] * wv[o * R + r];
        if (ss == 0.0) throw NumericError("demodulate: zero output map with epsilon 0");
        const double d = 1.0 / std::sqrt(ss);
        for (std::size_t r = 0; r < R; ++r) out[o * R + r] = wv[o * R + r] * d;
    }
    return tape_of(w).record("demodulate", std::move(out), {w}, [w, eps, O, R](Tape& t, const Tensor& g) {
        const auto& wv = t.value(w);
        auto& gw = t.grad_buffer(w);
        for (std::size_t o = 0; o < O; ++o) {
            double ss = eps, gdotw = 0.0;
            for (std::size_t r = 0; r < R; ++r) {
                ss += wv[o * R + r] * wv[o * R + r];
                gdotw += g[o * R + r] * wv[o * R + r];
            }
            const double d = 1.0 / std::sqrt(ss);
            const double d3 = d * d * d;
            for (std::size_t r = 0; r < R; ++r) {
                gw[o * R + r] += d * g[o * R + r] - d3 * gdotw * wv[o * R + r];
            }
        }
    });
}

Var reshape(Var x, Shape shape) {
    Tensor out = x.value().reshaped(std::move(shape));
    return tape_of(x).record("reshape", std::move(out), {x}, [x](Tape& t, const Tensor& g) {
        auto& gx = t.grad_buffer(x);
        for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
    });
}

Var row(Var x, std::size_t i) {
    expect_rank("row", x, 2);
    const std::size_t k = x.shape()[0], n = x.shape()[1];
    if (i >= k) throw ShapeError("row " + std::to_string(i) + " of " + shape_string(x.shape()));
    const auto& xv = x.value();
    Tensor out(Shape{n}, std::vector<double>(xv.data().begin() + i * n, xv.data().begin() + (i + 1) * n));
    return tape_of(x).record("row", std::move(out), {x}, [x, i, n](Tape& t, const Tensor& g) {
        auto& gx = t.grad_buffer(x);
        for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += g[j];
    });
}

Var slice(Var x, std::size_t offset, std::size_t length) {
    expect_rank("slice", x, 1);
    if (offset + length > x.shape()[0]) {
        throw ShapeError("slice [" + std::to_string(offset) + "," + std::to_string(offset + length) +
                         ") of " + shape_string(x.shape()));
    }
    const auto& xv = x.value();
    Tensor out(Shape{length},
               std::vector<double>(xv.data().begin() + offset, xv.data().begin() + offset + length));
    return tape_of(x).record("slice", std::move(out), {x}, [x, offset, length](Tape& t, const Tensor& g) {
        auto& gx = t.grad_buffer(x);
        for (std::size_t j = 0; j < length; ++j) gx[offset + j] += g[j];
    });
}

Var stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw ShapeError("stack_rows: no rows");
    const std::size_t n = rows[0].shape().size() == 1 ? rows[0].shape()[0] : 0;
    for (const auto& r : rows) {
        same_tape(rows[0], r);
        if (r.shape() != Shape{n}) throw ShapeError("stack_rows: ragged rows");
    }
    const std::size_t k = rows.size();
    Tensor out(Shape{k, n});
    for (std::size_t i = 0; i < k; ++i) {
        const auto& v = rows[i].value();
        std::copy(v.data().begin(), v.data().end(), out.data().begin() + i * n);
    }
    return tape_of(rows[0]).record("stack_rows", std::move(out), rows, [rows, n](Tape& t, const Tensor& g) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!t.requires_grad(rows[i])) continue;
            auto& gr = t.grad_buffer(rows[i]);
            for (std::size_t j = 0; j < n; ++j) gr[j] += g[i * n + j];
        }
    });
}

Var mse(Var a, Var b) { return mean(square(sub(a, b))); }

Var mean_abs_error(Var a, Var b) { return mean(abs(sub(a, b))); }

}  // namespace lsap::ops
