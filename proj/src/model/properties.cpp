#include "lsap/properties.hpp"

#include <json.hpp>

#include <cmath>

#include "lsap/adam.hpp"
#include "lsap/error.hpp"
#include "lsap/latent.hpp"
#include "lsap/linalg.hpp"
#include "lsap/parallel.hpp"
#include "lsap/rng.hpp"

namespace lsap {

namespace {

constexpr double kPixelTol = 1e-9;
constexpr double kChainPixelTol = 1e-6;
constexpr double kStyleTol = 1e-8;
constexpr double kResidualTol = 1e-10;

double relative_style_error(const Tensor& got, const Tensor& base, double a) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.numel(); ++i) {
        const double t = a * base[i];
        num += (got[i] - t) * (got[i] - t);
        den += t * t;
    }
    if (den == 0.0) throw NumericError("style vector is zero");
    return std::sqrt(num / den);
}

void check_layer(const Generator& gen, std::size_t layer) {
    if (layer >= gen.num_layers()) throw ConfigError("layer " + std::to_string(layer) + " out of range");
}

}  // namespace

PropertyReport check_scale_invariance(const Generator& gen, std::uint64_t seed, std::size_t layer, double a) {
    check_layer(gen, layer);
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("scale invariance needs a > 0");
    const Generator g0 = gen.with_epsilon(0.0);
    auto s = g0.styles_from_w(g0.mapping(sample_z(g0, seed, 0)));
    const Tensor base = g0.synthesize(s);
    for (auto& v : s[layer].data()) v *= a;
    PropertyReport r;
    r.property = "scale_invariance";
    r.seed = seed;
    r.layer = layer;
    r.a = a;
    r.deviation = max_abs_diff(base, g0.synthesize(s));
    r.tolerance = kPixelTol;
    r.pass = r.deviation < kPixelTol;
    return r;
}

ShiftSolution solve_alignment_shift(const Tensor& A, const Tensor& b, double a) {
    if (A.rank() != 2 || b.rank() != 1 || b.numel() != A.dim(0)) throw ShapeError("solve_alignment_shift: shapes");
    std::vector<double> rhs(b.numel());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = (a - 1.0) * b[i];
    auto sol = solve_least_squares(A, rhs);
    ShiftSolution out;
    out.y = Tensor::vector(std::move(sol.x));
    out.residual = sol.residual;
    out.rank = sol.rank;
    return out;
}

WPrime construct_w_prime(const Generator& gen, const Tensor& w, std::size_t layer, double a) {
    check_layer(gen, layer);
    const auto& p = gen.params();
    const Tensor s = gen.affine(w, layer);
    if (l2_norm(s.data()) == 0.0) throw NumericError("construct_w_prime: style vector is zero");
    auto shift = solve_alignment_shift(p.affine_weight[layer], p.affine_bias[layer], a);
    WPrime out;
    out.w_prime = Tensor(w.shape());
    for (std::size_t i = 0; i < w.numel(); ++i) out.w_prime[i] = a * w[i] + shift.y[i];
    out.residual = shift.residual;
    out.rank = shift.rank;
    out.deviation = relative_style_error(gen.affine(out.w_prime, layer), s, a);
    return out;
}

ZPrime find_z_prime(const Generator& gen, const Tensor& z, std::size_t layer, double a, std::size_t steps,
                    std::uint64_t seed) {
    check_layer(gen, layer);
    const Tensor s = gen.affine(gen.mapping(z), layer);
    if (l2_norm(s.data()) == 0.0) throw NumericError("find_z_prime: style vector is zero");
    Tensor target = s;
    for (auto& v : target.data()) v *= a;
    const double target_norm = l2_norm(target.data());

    Rng rng(seed, 0);
    Tensor zp = z;
    const double noise = 1e-2 * std::min(1.0, std::abs(a - 1.0));
    for (auto& v : zp.data()) v += noise * rng.normal();

    auto deviation = [&](const Tensor& candidate) {
        return relative_style_error(gen.affine(gen.mapping(candidate), layer), s, a);
    };

    ZPrime out;
    out.deviation = deviation(zp);
    AdamConfig cfg;
    cfg.lr = 0.2;
    Adam adam(cfg, std::span<const Tensor>(&zp, 1));
    std::size_t step = 0;
    for (; step < steps && out.deviation > 1e-10; ++step) {
        Tape t;
        GeneratorGraph gg(gen, t);
        Var x = t.leaf(zp);
        Var diff = ops::sub(gg.affine(gg.mapping(x), layer), t.constant(target));
        Var loss = ops::scale(ops::sum(ops::square(diff)), 1.0 / (target_norm * target_norm));
        t.backward(loss);
        Tensor g = t.grad(x);
        adam.step(std::span<Tensor>(&zp, 1), std::span<const Tensor>(&g, 1));
        out.deviation = deviation(zp);
    }
    out.steps_used = step;
    out.converged = out.deviation < 1e-3;
    out.z_prime = std::move(zp);
    return out;
}

PropertyReport check_many_to_one(const Generator& gen, const Tensor& w, std::size_t layer, double a) {
    check_layer(gen, layer);
    const Generator g0 = gen.with_epsilon(0.0);
    auto wp = construct_w_prime(g0, w, layer, a);
    PropertyReport r;
    r.property = "many_to_one_w";
    r.layer = layer;
    r.a = a;
    r.residual = wp.residual;
    r.style_deviation = wp.deviation;
    r.tolerance = kChainPixelTol;
    if (wp.deviation >= 1e-6) {
        // The chain is only meaningful when the shift system was solved.
        r.deviation = std::nan("");
        r.pass = false;
        r.note = "shift system not solvable: residual " + std::to_string(wp.residual) + ", rank " +
                 std::to_string(wp.rank);
        return r;
    }
    auto s = g0.styles_from_w(w);
    auto s_prime = s;
    s_prime[layer] = g0.affine(wp.w_prime, layer);
    r.deviation = max_abs_diff(g0.synthesize(s), g0.synthesize(s_prime));
    r.pass = r.residual < kResidualTol && r.style_deviation < kStyleTol && r.deviation < kChainPixelTol;
    return r;
}

Generator rank_deficient_fixture(const Generator& gen, std::size_t layer, std::size_t rank, std::uint64_t seed) {
    check_layer(gen, layer);
    const auto& A = gen.params().affine_weight[layer];
    const std::size_t m = A.dim(0), n = A.dim(1);
    if (rank == 0 || rank >= std::min(m, n)) throw ConfigError("fixture rank must be in [1, min(m, n))");
    Rng rng(seed, 0);
    Tensor left = sample_standard_normal(rng, {m, rank});
    Tensor right = sample_standard_normal(rng, {rank, n});
    Tensor low({m, n}, 0.0);
    const double s = 0.5 / std::sqrt(static_cast<double>(rank * n));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < rank; ++k) v += left[i * rank + k] * right[k * n + j];
            low[i * n + j] = s * v;
        }
    // A generic b lies outside the rank-deficient column space.
    return gen.with_affine(layer, std::move(low), gen.params().affine_bias[layer]);
}

std::vector<PropertyReport> run_property_suite(const Generator& gen, std::uint64_t seed) {
    std::vector<PropertyReport> out;
    const std::size_t k = gen.num_layers();
    for (std::size_t l = 0; l < k; ++l)
        for (double a : {0.1, 1.0, 2.5, 10.0}) out.push_back(check_scale_invariance(gen, seed, l, a));

    const Tensor w = gen.mapping(sample_z(gen, seed, 1));
    for (std::size_t l = 0; l < k; ++l) {
        for (double a : {1.0, 2.5, 3.0}) {
            auto r = check_many_to_one(gen, w, l, a);
            r.seed = seed;
            out.push_back(r);
        }
    }

    const auto fixture = rank_deficient_fixture(gen, 0, 8, seed);
    auto wp = construct_w_prime(fixture, w, 0, 2.5);
    PropertyReport def;
    def.property = "rank_deficient_shift";
    def.seed = seed;
    def.layer = 0;
    def.a = 2.5;
    def.residual = wp.residual;
    def.style_deviation = wp.deviation;
    def.deviation = wp.deviation;
    def.tolerance = kResidualTol;
    // Expected outcome: the residual is reported and clearly positive.
    def.pass = wp.residual > kResidualTol;
    def.note = "affine rank " + std::to_string(wp.rank) + " of " +
               std::to_string(fixture.params().affine_weight[0].dim(0));
    out.push_back(def);

    std::vector<PropertyReport> zs(2 * k);
    parallel_for(zs.size(), [&](std::size_t i) {
        const std::size_t l = i / 2;
        const std::uint64_t trial = i % 2;
        const Tensor z = sample_z(gen, seed, 100 + i);
        auto zp = find_z_prime(gen, z, l, 2.0, 2000, seed + trial);
        PropertyReport r;
        r.property = "many_to_one_z";
        r.seed = seed + trial;
        r.layer = l;
        r.a = 2.0;
        r.style_deviation = zp.deviation;
        r.deviation = zp.deviation;
        r.tolerance = 1e-3;
        double dist = 0.0;
        for (std::size_t j = 0; j < z.numel(); ++j) dist += (zp.z_prime[j] - z[j]) * (zp.z_prime[j] - z[j]);
        r.pass = zp.converged && std::sqrt(dist) > 1e-6;
        r.note = "steps " + std::to_string(zp.steps_used);
        zs[i] = r;
    });
    out.insert(out.end(), zs.begin(), zs.end());
    return out;
}

std::string properties_json(const std::vector<PropertyReport>& reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["property"] = r.property;
        j["seed"] = r.seed;
        j["layer"] = r.layer;
        j["a"] = r.a;
        j["deviation"] = num(r.deviation);
        j["style_deviation"] = num(r.style_deviation);
        j["residual"] = num(r.residual);
        j["tolerance"] = r.tolerance;
        j["pass"] = r.pass;
        if (!r.note.empty()) j["note"] = r.note;
        arr.push_back(j);
    }
    nlohmann::ordered_json root;
    std::size_t passed = 0;
    for (const auto& r : reports) passed += r.pass ? 1 : 0;
    root["checks"] = reports.size();
    root["passed"] = passed;
    root["records"] = arr;
    return root.dump(2) + "\n";
}

}  // namespace lsap
