#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include <json.hpp>

#include "lsap/error.hpp"
#include "lsap/latent.hpp"
#include "lsap/properties.hpp"
#include "lsap/rng.hpp"

using namespace lsap;

namespace {

const Generator& toy() {
    static const Generator g = Generator::random(GeneratorConfig{}, 7);
    return g;
}

Eigen::MatrixXd to_eigen(const Tensor& t) {
    Eigen::MatrixXd m(t.dim(0), t.dim(1));
    for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j) m(i, j) = t[i * t.dim(1) + j];
    return m;
}

Eigen::VectorXd to_eigen_vec(const Tensor& t) {
    Eigen::VectorXd v(t.numel());
    for (std::size_t i = 0; i < t.numel(); ++i) v(i) = t[i];
    return v;
}

Tensor w_of(std::uint64_t seed, std::uint64_t i) { return toy().mapping(sample_z(toy(), seed, i)); }

}  // namespace

TEST_CASE("scale_invariance holds per layer") {
    for (std::size_t l = 0; l < 6; ++l) {
        auto r1 = check_scale_invariance(toy(), 4, l, 1.0);
        CHECK(r1.deviation == 0.0);
        for (double a : {2.5, 1e-6, 10.0}) {
            auto r = check_scale_invariance(toy(), 4, l, a);
            CHECK(r.deviation < 1e-9);
            CHECK(r.pass);
        }
    }
    CHECK_THROWS_AS(check_scale_invariance(toy(), 4, 0, 0.0), ConfigError);
    CHECK_THROWS_AS(check_scale_invariance(toy(), 4, 0, -1.0), ConfigError);
    CHECK_THROWS_AS(check_scale_invariance(toy(), 4, 6, 2.0), ConfigError);
}

TEST_CASE("scale_invariance breaks with positive eps") {
    // Guards against a check that passes for trivial reasons.
    const Generator g = toy().with_epsilon(1e-2);
    auto s = g.styles_from_w(w_of(4, 0));
    const Tensor base = g.synthesize(s);
    for (auto& v : s[2].data()) v *= 1e-3;
    CHECK(max_abs_diff(base, g.synthesize(s)) > 1e-6);
}

TEST_CASE("alignment shift against a pseudoinverse oracle") {
    Rng rng(21, 0);
    SUBCASE("square full rank equals the direct solve") {
        Tensor A = sample_standard_normal(rng, {16, 16});
        Tensor b = sample_standard_normal(rng, {16});
        auto sol = solve_alignment_shift(A, b, 2.5);
        Eigen::VectorXd direct = to_eigen(A).partialPivLu().solve(1.5 * to_eigen_vec(b));
        CHECK((to_eigen_vec(sol.y) - direct).norm() < 1e-10 * direct.norm());
        CHECK(sol.residual < 1e-10);
        CHECK(sol.rank == 16);
    }
    SUBCASE("wide full row rank, minimum norm") {
        Tensor A = sample_standard_normal(rng, {8, 32});
        Tensor b = sample_standard_normal(rng, {8});
        auto sol = solve_alignment_shift(A, b, 3.0);
        const Eigen::MatrixXd Ae = to_eigen(A);
        Eigen::VectorXd oracle = Ae.completeOrthogonalDecomposition().pseudoInverse() * (2.0 * to_eigen_vec(b));
        CHECK((to_eigen_vec(sol.y) - oracle).norm() < 1e-10 * oracle.norm());
        CHECK(sol.residual < 1e-10);
    }
    SUBCASE("rank deficient residual matches (I - A A+) (a - 1) b") {
        Tensor L = sample_standard_normal(rng, {16, 4});
        Tensor R = sample_standard_normal(rng, {4, 32});
        const Eigen::MatrixXd Ae = to_eigen(L) * to_eigen(R);
        Tensor A({16, 32});
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = 0; j < 32; ++j) A[i * 32 + j] = Ae(i, j);
        Tensor b = sample_standard_normal(rng, {16});
        auto sol = solve_alignment_shift(A, b, 2.0);
        const Eigen::VectorXd rhs = to_eigen_vec(b);
        const Eigen::MatrixXd pinv = Ae.completeOrthogonalDecomposition().pseudoInverse();
        const double oracle = (rhs - Ae * (pinv * rhs)).norm();
        CHECK(sol.rank == 4);
        CHECK(sol.residual == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(sol.residual > 1e-3);
    }
    CHECK_THROWS_AS(solve_alignment_shift(Tensor({4, 3}), Tensor({3}), 2.0), ShapeError);
}

TEST_CASE("many_to_one_w constructs a distinct w with the scaled style") {
    const Tensor w = w_of(9, 0);
    for (std::size_t l = 0; l < 6; ++l) {
        for (double a : {2.5, 3.0, 0.4}) {
            auto wp = construct_w_prime(toy(), w, l, a);
            CHECK(wp.deviation < 1e-8);
            CHECK(wp.residual < 1e-10);
            CHECK(max_abs_diff(wp.w_prime, w) > 1e-3);
            const Tensor s = toy().affine(w, l);
            const Tensor sp = toy().affine(wp.w_prime, l);
            for (std::size_t i = 0; i < s.numel(); ++i) CHECK(sp[i] == doctest::Approx(a * s[i]).epsilon(1e-8));
        }
        auto same = construct_w_prime(toy(), w, l, 1.0);
        CHECK(max_abs_diff(same.w_prime, w) == 0.0);
    }
}

TEST_CASE("many_to_one_w chain gives the same image") {
    const Tensor w = w_of(9, 1);
    for (std::size_t l = 0; l < 6; ++l) {
        auto r = check_many_to_one(toy(), w, l, 3.0);
        CHECK(r.deviation < 1e-6);
        CHECK(r.pass);
    }
}

TEST_CASE("rank deficient fixture reports a positive residual") {
    auto fx = rank_deficient_fixture(toy(), 0, 8, 5);
    auto wp = construct_w_prime(fx, w_of(9, 0), 0, 2.5);
    CHECK(wp.rank == 8);
    CHECK(wp.residual > 1e-6);
    auto r = check_many_to_one(fx, w_of(9, 0), 0, 2.5);
    CHECK_FALSE(r.pass);
    CHECK(std::isnan(r.deviation));
    CHECK_FALSE(r.note.empty());
    CHECK_THROWS_AS(rank_deficient_fixture(toy(), 0, 16, 5), ConfigError);
    CHECK_THROWS_AS(rank_deficient_fixture(toy(), 0, 0, 5), ConfigError);
}

namespace {

int z_prime_successes(std::size_t layer) {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Tensor z = sample_z(toy(), 32, seed);
        auto r = find_z_prime(toy(), z, layer, 2.0, 2000, seed);
        double dist = 0.0;
        for (std::size_t j = 0; j < z.numel(); ++j) dist += (r.z_prime[j] - z[j]) * (r.z_prime[j] - z[j]);
        if (r.converged && std::sqrt(dist) > 1e-6) ++ok;
    }
    return ok;
}

}  // namespace

TEST_CASE("many_to_one_z at a = 1 is immediate") {
    const Tensor z = sample_z(toy(), 31, 0);
    auto same = find_z_prime(toy(), z, 0, 1.0, 10, 1);
    CHECK(same.deviation < 1e-10);
    CHECK(same.converged);
}

TEST_CASE("many_to_one_z on an 8-dim style layer") {
    const int ok = z_prime_successes(5);
    MESSAGE("converged " << ok << " of 10");
    CHECK(ok >= 8);
}

// The required z' lies hundreds of prior standard deviations out for the
// 16-dim style layers; Adam does not get there in 2000 steps.
TEST_CASE("many_to_one_z on a 16-dim style layer" * doctest::may_fail()) {
    const int ok = z_prime_successes(0);
    MESSAGE("converged " << ok << " of 10");
    CHECK(ok >= 8);
}

TEST_CASE("property report json") {
    PropertyReport a;
    a.property = "many_to_one_w";
    a.deviation = std::nan("");
    a.pass = false;
    a.note = "x";
    PropertyReport b;
    b.property = "scale_invariance";
    b.pass = true;
    auto j = nlohmann::json::parse(properties_json({a, b}));
    CHECK(j["checks"] == 2);
    CHECK(j["passed"] == 1);
    CHECK(j["records"][0]["deviation"].is_null());
    CHECK(j["records"][0]["note"] == "x");
    CHECK_FALSE(j["records"][1].contains("note"));
}
