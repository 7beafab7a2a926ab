#include "lsap/alignment.hpp"

#include "lsap/error.hpp"

namespace lsap {

namespace {

void check_layers(std::size_t n, const MeanCode& mu) {
    if (n != mu.mu.size()) {
        throw ShapeError("nscd: code has " + std::to_string(n) + " layers, mean code has " +
                         std::to_string(mu.mu.size()));
    }
}

}  // namespace

std::vector<double> nscd_layers(const StyleSet& styles, const MeanCode& mu) {
    check_layers(styles.size(), mu);
    std::vector<double> out(styles.size());
    for (std::size_t l = 0; l < styles.size(); ++l) {
        if (styles[l].shape() != mu.mu[l].shape()) throw ShapeError("nscd: layer " + std::to_string(l) + " shape");
        const double n = l2_norm(styles[l].data());
        if (n == 0.0) throw NumericError("nscd: layer " + std::to_string(l) + " is zero");
        out[l] = 1.0 - dot(styles[l].data(), mu.mu[l].data()) / n;
    }
    return out;
}

NscdValue nscd(const std::vector<StyleSet>& styles, const MeanCode& mu) {
    if (styles.empty()) throw ConfigError("nscd: no codes");
    NscdValue v;
    v.per_layer.assign(mu.mu.size(), 0.0);
    for (const auto& s : styles) {
        auto d = nscd_layers(s, mu);
        for (std::size_t l = 0; l < d.size(); ++l) v.per_layer[l] += d[l];
    }
    for (auto& d : v.per_layer) {
        d /= static_cast<double>(styles.size());
        v.value += d;
    }
    v.value /= static_cast<double>(v.per_layer.size());
    return v;
}

NscdValue nscd(const Generator& gen, const std::vector<LatentCode>& codes, const MeanCode& mu) {
    std::vector<StyleSet> styles;
    styles.reserve(codes.size());
    for (const auto& c : codes) {
        if (c.space() == Space::S || c.space() == Space::SN) {
            styles.push_back(c.styles());
        } else {
            styles.push_back(to_style(gen, c).styles());
        }
    }
    return nscd(styles, mu);
}

Var nscd_loss(const std::vector<Var>& styles, const MeanCode& mu) {
    check_layers(styles.size(), mu);
    bool active = false;
    for (const auto& s : styles) active = active || (s.valid() && s.requires_grad());
    if (!active) throw ConfigError("nscd_loss: input is detached from any gradient tape");
    Tape& t = *styles.front().tape();
    Var total;
    for (std::size_t l = 0; l < styles.size(); ++l) {
        Var cos = ops::dot(ops::normalize(styles[l]), t.constant(mu.mu[l]));
        total = total.valid() ? ops::add(total, cos) : cos;
    }
    // 1 - mean_l cos
    Var mean_cos = ops::scale(total, 1.0 / static_cast<double>(styles.size()));
    return ops::sub(t.constant(Tensor::scalar(1.0)), mean_cos);
}

}  // namespace lsap
