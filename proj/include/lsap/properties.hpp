#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsap/generator.hpp"

namespace lsap {

struct PropertyReport {
    std::string property;
    std::uint64_t seed = 0;
    std::size_t layer = 0;  // 0-based
    double a = 1.0;
    double deviation = 0.0;        // pixel deviation, or the property's main measure
    double style_deviation = 0.0;  // relative, where it applies
    double residual = 0.0;         // least-squares residual, where it applies
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

// Max pixel difference between G_S(s) and G_S(s with layer l scaled by a),
// s from the seed's first sample, at eps = 0. Throws ConfigError for a <= 0.
PropertyReport check_scale_invariance(const Generator& gen, std::uint64_t seed, std::size_t layer, double a);

struct ShiftSolution {
    Tensor y;
    double residual = 0.0;
    std::size_t rank = 0;
};

// Minimum-norm y minimising ||A y - (a - 1) b||.
ShiftSolution solve_alignment_shift(const Tensor& A, const Tensor& b, double a);

struct WPrime {
    Tensor w_prime;
    double deviation = 0.0;  // ||F_l(w') - a F_l(w)|| / ||a F_l(w)||
    double residual = 0.0;
    std::size_t rank = 0;
};

// w' = a w + y, so that F_l(w') = a F_l(w) when the shift system is solvable.
WPrime construct_w_prime(const Generator& gen, const Tensor& w, std::size_t layer, double a);

struct ZPrime {
    Tensor z_prime;
    double deviation = 0.0;  // relative, as for WPrime
    bool converged = false;
    std::size_t steps_used = 0;
};

// Adam (lr 0.2) on ||F_l(z') - a F_l(z)||^2 with F_l = affine_l o mapping,
// from z plus noise of size 1e-2 min(1, |a - 1|). Converged when the deviation is < 1e-3.
ZPrime find_z_prime(const Generator& gen, const Tensor& z, std::size_t layer, double a, std::size_t steps,
                    std::uint64_t seed);

// Replaces layer l of s(w) by F_l(w') and compares images at eps = 0.
PropertyReport check_many_to_one(const Generator& gen, const Tensor& w, std::size_t layer, double a);

// Generator whose affine at `layer` has the given rank < its row count.
Generator rank_deficient_fixture(const Generator& gen, std::size_t layer, std::size_t rank, std::uint64_t seed);

// Every check the props command runs.
std::vector<PropertyReport> run_property_suite(const Generator& gen, std::uint64_t seed);
std::string properties_json(const std::vector<PropertyReport>& reports);

}  // namespace lsap
