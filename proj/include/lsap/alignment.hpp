#pragma once

#include <vector>

#include "lsap/latent.hpp"

namespace lsap {

// NSCD: 1 - cos(s^N_l, mu_l), averaged over codes and then uniformly over layers.
struct NscdValue {
    double value = 0.0;
    std::vector<double> per_layer;
};

// Per-layer cosine distances of one style set (S or SN) against mu.
std::vector<double> nscd_layers(const StyleSet& styles, const MeanCode& mu);
NscdValue nscd(const std::vector<StyleSet>& styles, const MeanCode& mu);
// S or SN codes; W and W+ codes are mapped to S with gen first.
NscdValue nscd(const Generator& gen, const std::vector<LatentCode>& codes, const MeanCode& mu);

// Differentiable L_NSCD of one embedded code pathway. The style vectors must
// depend on a leaf that requires a gradient.
Var nscd_loss(const std::vector<Var>& styles, const MeanCode& mu);

}  // namespace lsap
