#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lsap/tensor.hpp"

namespace lsap {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameter tensors.
class Adam {
public:
    Adam(AdamConfig cfg, std::span<const Tensor> params);

    void step(std::span<Tensor> params, std::span<const Tensor> grads);
    void set_lr(double lr) { cfg_.lr = lr; }
    const AdamConfig& config() const { return cfg_; }
    std::uint64_t steps() const { return t_; }

private:
    AdamConfig cfg_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::uint64_t t_ = 0;
};

}  // namespace lsap
