#include "lsap/adam.hpp"

#include <cmath>

#include "lsap/error.hpp"

namespace lsap {

Adam::Adam(AdamConfig cfg, std::span<const Tensor> params) : cfg_(cfg) {
    if (!(cfg.lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
    if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0) {
        throw ConfigError("adam: betas must lie in [0, 1)");
    }
    for (const auto& p : params) {
        m_.emplace_back(p.shape());
        v_.emplace_back(p.shape());
    }
}

void Adam::step(std::span<Tensor> params, std::span<const Tensor> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw ShapeError("adam: parameter count changed");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& x = params[p];
        const auto& g = grads[p];
        if (x.shape() != g.shape() || x.shape() != m_[p].shape()) {
            throw ShapeError("adam: gradient shape mismatch for parameter " + std::to_string(p));
        }
        auto& m = m_[p];
        auto& v = v_[p];
        for (std::size_t i = 0; i < x.numel(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            x[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
        if (!x.all_finite()) throw NumericError("adam: parameter became non-finite");
    }
}

}  // namespace lsap
