#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lsap/error.hpp"
#include "lsap/generator.hpp"
#include "lsap/grad_check.hpp"
#include "lsap/rng.hpp"

using namespace lsap;

namespace {

const Generator& toy() {
    static const Generator g = Generator::random(GeneratorConfig{}, 7);
    return g;
}

Tensor randn(Rng& rng, Shape shape) { return sample_standard_normal(rng, shape); }

Tensor flatten_styles(const StyleSet& s) {
    std::vector<double> flat;
    for (const auto& v : s) flat.insert(flat.end(), v.data().begin(), v.data().end());
    return Tensor::vector(std::move(flat));
}

std::vector<Var> split_styles(Var flat, const std::vector<std::size_t>& dims) {
    std::vector<Var> out;
    std::size_t off = 0;
    for (auto d : dims) {
        out.push_back(ops::slice(flat, off, d));
        off += d;
    }
    return out;
}

// Plain loop recomputation of A w + b.
Tensor recompute_affine(const Tensor& a, const Tensor& b, const Tensor& w) {
    const std::size_t m = a.dim(0), n = a.dim(1);
    Tensor out({m});
    for (std::size_t i = 0; i < m; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * w[j];
        out[i] = s;
    }
    return out;
}

}  // namespace

TEST_CASE("config validation") {
    GeneratorConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.resolution() == 32);
    c.channels = {16, 16, 8, 8, 8, 8};  // layer 3 feeds toRGB but changes width
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = GeneratorConfig{};
    c.channels.pop_back();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = GeneratorConfig{};
    c.epsilon = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("shapes") {
    const auto& g = toy();
    CHECK(g.image_shape() == Shape{3, 32, 32});
    CHECK(g.style_dims() == std::vector<std::size_t>{16, 16, 16, 16, 8, 8});
    Rng rng(1);
    auto img = g.generate_from_z(randn(rng, {32}));
    CHECK(img.shape() == Shape{3, 32, 32});
}

TEST_CASE("mapping") {
    const auto& g = toy();
    Rng rng(2);
    auto z = randn(rng, {32});
    CHECK(g.mapping(z) == g.mapping(z));
    CHECK_THROWS_AS(g.mapping(Tensor({31})), ShapeError);

    // With z = 0 each layer reduces to lrelu(bias path).
    const auto& p = g.params();
    Tensor h({32}, 0.0);
    for (std::size_t i = 0; i < p.mapping_weight.size(); ++i) {
        h = recompute_affine(p.mapping_weight[i], p.mapping_bias[i], h);
        for (auto& v : h.data()) v = v > 0 ? v : 0.2 * v;
    }
    CHECK(max_abs_diff(g.mapping(Tensor({32}, 0.0)), h) < 1e-15);

    Rng proj_rng(9);
    const Tensor proj = randn(proj_rng, {32});
    ScalarFn f = [&](Tape& t, Var x) {
        GeneratorGraph gg(g, t);
        return ops::dot(gg.mapping(x), t.constant(proj));
    };
    for (int trial = 0; trial < 5; ++trial) {
        CHECK(grad_check(f, randn(rng, {32})) < 1e-5);
    }
}

TEST_CASE("affine") {
    const auto& g = toy();
    Rng rng(3);
    const auto& p = g.params();
    for (std::size_t l = 0; l < g.num_layers(); ++l) {
        CHECK(g.affine(Tensor({32}, 0.0), l) == p.affine_bias[l]);
        auto w1 = randn(rng, {32}), w2 = randn(rng, {32});
        Tensor sum({32});
        for (std::size_t i = 0; i < 32; ++i) sum[i] = w1[i] + w2[i];
        auto lhs = g.affine(sum, l), a2 = g.affine(w2, l), a1 = g.affine(w1, l), a0 = g.affine(Tensor({32}, 0.0), l);
        for (std::size_t i = 0; i < lhs.numel(); ++i) {
            CHECK(std::abs((lhs[i] - a2[i]) - (a1[i] - a0[i])) < 1e-12);
        }
        CHECK(max_abs_diff(a1, recompute_affine(p.affine_weight[l], p.affine_bias[l], w1)) < 1e-13);
    }
    CHECK_THROWS_AS(g.affine(Tensor({32}, 0.0), 6), ShapeError);
}

TEST_CASE("modulate_demodulate") {
    Rng rng(4);
    auto w = randn(rng, {4, 3, 3, 3});
    auto s = randn(rng, {3});

    SUBCASE("unit style normalises each output map") {
        auto out = modulate_demodulate(w, Tensor({3}, 1.0), 0.0);
        for (std::size_t o = 0; o < 4; ++o) {
            double n2 = 0.0;
            for (std::size_t k = 0; k < 27; ++k) n2 += w[o * 27 + k] * w[o * 27 + k];
            for (std::size_t k = 0; k < 27; ++k) {
                CHECK(std::abs(out[o * 27 + k] - w[o * 27 + k] / std::sqrt(n2)) < 1e-14);
            }
        }
    }
    SUBCASE("positive scale leaves the kernel unchanged") {
        Tensor s2 = s;
        for (auto& v : s2.data()) v *= 2.5;
        CHECK(max_abs_diff(modulate_demodulate(w, s, 0.0), modulate_demodulate(w, s2, 0.0)) < 1e-14);
    }
    SUBCASE("negative unit scale flips the sign") {
        Tensor s2 = s;
        for (auto& v : s2.data()) v = -v;
        auto a = modulate_demodulate(w, s, 0.0), b = modulate_demodulate(w, s2, 0.0);
        for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a[i] == -b[i]);
    }
    SUBCASE("zero style with zero epsilon") {
        CHECK_THROWS_AS(modulate_demodulate(w, Tensor({3}, 0.0), 0.0), NumericError);
        CHECK(modulate_demodulate(w, Tensor({3}, 0.0), 1e-8).all_finite());
    }
}

TEST_CASE("synthesis is deterministic and validates styles") {
    const auto& g = toy();
    Rng rng(5);
    auto s = g.styles_from_w(g.mapping(randn(rng, {32})));
    CHECK(g.synthesize(s) == g.synthesize(s));
    auto bad = s;
    bad.pop_back();
    CHECK_THROWS_AS(g.synthesize(bad), ShapeError);
    bad = s;
    bad[2] = Tensor({15});
    CHECK_THROWS_AS(g.synthesize(bad), ShapeError);
}

TEST_CASE("per-layer scale invariance at eps = 0") {
    const auto g = toy().with_epsilon(0.0);
    Rng rng(6);
    for (int trial = 0; trial < 3; ++trial) {
        auto s = g.styles_from_w(g.mapping(randn(rng, {32})));
        auto base = g.synthesize(s);
        for (std::size_t l = 0; l < g.num_layers(); ++l) {
            for (double a : {2.5, 0.01, 1e3, 1.0 + 1e-9}) {
                auto scaled = s;
                for (auto& v : scaled[l].data()) v *= a;
                CHECK(max_abs_diff(base, g.synthesize(scaled)) < 1e-9);
            }
        }
    }
}

TEST_CASE("scale invariance with eps > 0 degrades proportionally to eps") {
    // Measured: the deviation stays below eps times a small constant.
    Rng rng(7);
    for (double eps : {1e-8, 1e-6, 1e-4}) {
        const auto g = toy().with_epsilon(eps);
        auto s = g.styles_from_w(g.mapping(randn(rng, {32})));
        auto base = g.synthesize(s);
        double worst = 0.0;
        for (std::size_t l = 0; l < g.num_layers(); ++l) {
            auto scaled = s;
            for (auto& v : scaled[l].data()) v *= 2.5;
            worst = std::max(worst, max_abs_diff(base, g.synthesize(scaled)));
        }
        MESSAGE("eps=" << eps << " max deviation " << worst);
        CHECK(worst < 10.0 * eps);
    }
}

TEST_CASE("gradient wrt styles matches finite differences") {
    const auto& g = toy();
    const auto dims = g.style_dims();
    ScalarFn f = [&](Tape& t, Var flat) {
        GeneratorGraph gg(g, t);
        return ops::sum(gg.synthesize(split_styles(flat, dims)));
    };
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = g.styles_from_w(g.mapping(randn(rng, {32})));
        auto r = grad_check_detailed(f, flatten_styles(s));
        CHECK(r.max_relative_error < 1e-5);
    }
}

TEST_CASE("gradient wrt z matches finite differences") {
    const auto& g = toy();
    ScalarFn f = [&](Tape& t, Var z) {
        GeneratorGraph gg(g, t);
        return ops::sum(gg.generate_from_z(z));
    };
    Rng rng(9);
    for (int trial = 0; trial < 3; ++trial) CHECK(grad_check(f, randn(rng, {32})) < 1e-5);
}

TEST_CASE("gradient wrt w and w+ matches finite differences") {
    const auto& g = toy();
    ScalarFn fw = [&](Tape& t, Var w) {
        GeneratorGraph gg(g, t);
        return ops::sum(gg.synthesize(gg.styles_from_w(w)));
    };
    ScalarFn fwp = [&](Tape& t, Var wp) {
        GeneratorGraph gg(g, t);
        return ops::sum(gg.synthesize(gg.styles_from_wplus(wp)));
    };
    Rng rng(13);
    for (int trial = 0; trial < 3; ++trial) {
        auto w = g.mapping(randn(rng, {32}));
        CHECK(grad_check(fw, w) < 1e-5);
        Tensor wp({6, 32});
        for (std::size_t i = 0; i < wp.numel(); ++i) wp[i] = w[i % 32] + 0.1 * rng.normal();
        CHECK(grad_check(fwp, wp) < 1e-5);
    }
}

TEST_CASE("generate_from_z composes the stages") {
    const auto& g = toy();
    Rng rng(10);
    auto z = randn(rng, {32});
    CHECK(g.generate_from_z(z) == g.synthesize(g.styles_from_w(g.mapping(z))));
    auto w = g.mapping(z);
    Tensor wplus({6, 32});
    for (std::size_t l = 0; l < 6; ++l)
        for (std::size_t i = 0; i < 32; ++i) wplus[l * 32 + i] = w[i];
    CHECK(g.generate_from_wplus(wplus) == g.generate_from_w(w));
}

TEST_CASE("distinct seeds give distinct images and batches stay finite") {
    const auto& g = toy();
    Rng a(100), b(101);
    CHECK(max_abs_diff(g.generate_from_z(randn(a, {32})), g.generate_from_z(randn(b, {32}))) > 1e-6);
    Rng rng(11);
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (int i = 0; i < 64; ++i) {
        auto img = g.generate_from_z(randn(rng, {32}));
        CHECK(img.all_finite());
        for (double v : img.data()) {
            sum += v;
            sum2 += v * v;
            ++n;
        }
    }
    const double mean = sum / n;
    MESSAGE("pixel mean " << mean << " std " << std::sqrt(sum2 / n - mean * mean));
}

TEST_CASE("checkpoint round trip and checksum") {
    const auto& g = toy();
    std::stringstream ss;
    write_generator(ss, g);
    auto back = read_generator(ss);
    CHECK(generator_checksum(back) == generator_checksum(g));
    Rng rng(12);
    auto z = randn(rng, {32});
    CHECK(back.generate_from_z(z) == g.generate_from_z(z));
    CHECK(generator_checksum(Generator::random(GeneratorConfig{}, 8)) != generator_checksum(g));
    CHECK(generator_checksum(Generator::random(GeneratorConfig{}, 7)) == generator_checksum(g));

    std::stringstream bad("LSAX");
    CHECK_THROWS_AS(read_generator(bad), ConfigError);
}
