#include "lsap/inversion.hpp"

#include <cmath>
#include <cstdio>

#include "lsap/error.hpp"
#include "lsap/parallel.hpp"
#include "lsap/rng.hpp"

namespace lsap {

std::string image_loss_name(ImageLoss k) { return k == ImageLoss::MSE ? "mse" : "l1"; }

ImageLoss parse_image_loss(const std::string& name) {
    if (name == "mse") return ImageLoss::MSE;
    if (name == "l1") return ImageLoss::L1;
    throw ConfigError("unknown image loss '" + name + "'");
}

Var image_loss(ImageLoss kind, Var image, Var target) {
    return kind == ImageLoss::MSE ? ops::mse(image, target) : ops::mean_abs_error(image, target);
}

namespace {
void require_w_space(Space s) {
    if (s != Space::W && s != Space::Wplus) throw ConfigError("inversion space must be W or Wplus");
}
}  // namespace

double InversionConfig::preset_lambda(Space s) {
    require_w_space(s);
    return s == Space::W ? 5.0 : 20.0;
}

double InversionConfig::toy_lambda(Space s) {
    require_w_space(s);
    return s == Space::W ? 0.25 : 0.1;
}

InversionConfig InversionConfig::for_space(Space s) {
    InversionConfig c;
    c.space = s;
    c.lambda = preset_lambda(s);
    return c;
}

void InversionConfig::validate() const {
    if (space != Space::W && space != Space::Wplus) throw ConfigError("inversion space must be W or Wplus");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (steps == 0) throw ConfigError("steps must be >= 1");
    if (!(adam.lr > 0.0)) throw ConfigError("learning rate must be > 0");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(adam.eps > 0.0)) throw ConfigError("Adam eps must be > 0");
}

namespace {

std::vector<Var> styles_for(const GeneratorGraph& gg, Space space, Var code) {
    return space == Space::W ? gg.styles_from_w(code) : gg.styles_from_wplus(code);
}

LatentCode wrap(Space space, Tensor v) {
    return space == Space::W ? LatentCode::w(std::move(v)) : LatentCode::wplus(std::move(v));
}

double detached_nscd(const std::vector<Var>& styles, const MeanCode& mu) {
    StyleSet s;
    for (const auto& v : styles) s.push_back(v.value());
    return nscd({s}, mu).value;
}

}  // namespace

InversionReport invert_optimize(const Tensor& target, const Generator& gen, const MeanCode& mu,
                                const Tensor& w_init, const InversionConfig& cfg) {
    cfg.validate();
    if (target.shape() != gen.image_shape()) {
        throw ShapeError("invert: target has shape " + shape_string(target.shape()) + ", expected " +
                         shape_string(gen.image_shape()));
    }
    if (w_init.shape() != Shape{gen.config().w_dim}) throw ShapeError("invert: w_init has wrong shape");

    Tensor code = cfg.space == Space::W ? w_init : broadcast_wplus(LatentCode::w(w_init), gen.num_layers()).vec();
    Adam adam(cfg.adam, std::span<const Tensor>(&code, 1));
    InversionReport report;
    report.trajectory.reserve(cfg.steps);

    try {
        for (std::size_t step = 0; step < cfg.steps; ++step) {
            Tape t;
            GeneratorGraph gg(gen, t);
            Var x = t.leaf(code);
            auto styles = styles_for(gg, cfg.space, x);
            Var img_loss = image_loss(cfg.loss, gg.synthesize(styles), t.constant(target));
            Var total = img_loss;
            if (cfg.alignment_term) total = ops::add(img_loss, ops::scale(nscd_loss(styles, mu), cfg.lambda));
            report.trajectory.push_back({img_loss.value().item(), detached_nscd(styles, mu)});
            t.backward(total);
            Tensor g = t.grad(x);
            if (!g.all_finite()) throw NumericError("non-finite gradient at step " + std::to_string(step));
            adam.step(std::span<Tensor>(&code, 1), std::span<const Tensor>(&g, 1));
        }
        Tape t;
        GeneratorGraph gg(gen, t);
        auto styles = styles_for(gg, cfg.space, t.constant(code));
        report.final_mse = ops::mse(gg.synthesize(styles), t.constant(target)).value().item();
        report.final_nscd = detached_nscd(styles, mu);
    } catch (const NumericError& e) {
        report.aborted = true;
        report.diagnostic = std::string("step ") + std::to_string(report.trajectory.size()) + ": " + e.what();
        report.final_mse = std::nan("");
        report.final_nscd = std::nan("");
    }
    report.code = wrap(cfg.space, std::move(code));
    return report;
}

std::vector<AblationRow> ablate_lambda(const std::vector<double>& lambdas, std::size_t n_targets,
                                       const InversionConfig& base, const Generator& gen,
                                       const MeanCode& mu, const Tensor& w_init,
                                       std::uint64_t target_seed) {
    if (lambdas.empty()) throw ConfigError("ablate: empty lambda list");
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > lambdas[i - 1])) throw ConfigError("ablate: lambda list must be strictly ascending");
    }
    if (n_targets == 0) throw ConfigError("ablate: need at least one target");
    std::vector<Tensor> targets;
    for (std::size_t i = 0; i < n_targets; ++i) targets.push_back(gen.generate_from_z(sample_z(gen, target_seed, i)));

    // One slot per (lambda, target) run; reduced in a fixed order afterwards.
    const std::size_t runs = lambdas.size() * n_targets;
    std::vector<InversionReport> reports(runs);
    parallel_for(runs, [&](std::size_t r) {
        InversionConfig cfg = base;
        cfg.lambda = lambdas[r / n_targets];
        reports[r] = invert_optimize(targets[r % n_targets], gen, mu, w_init, cfg);
    });

    std::vector<AblationRow> rows;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        AblationRow row;
        row.lambda = lambdas[li];
        for (std::size_t ti = 0; ti < n_targets; ++ti) {
            const auto& rep = reports[li * n_targets + ti];
            if (rep.aborted) {
                ++row.aborted;
                continue;
            }
            row.mean_mse += rep.final_mse;
            row.mean_nscd += rep.final_nscd;
            ++row.runs;
        }
        if (row.runs > 0) {
            row.mean_mse /= static_cast<double>(row.runs);
            row.mean_nscd /= static_cast<double>(row.runs);
        } else {
            row.mean_mse = row.mean_nscd = std::nan("");
        }
        rows.push_back(row);
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = "lambda,mse,nscd,runs,aborted\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.10e,%.10e,%zu,%zu\n", r.lambda, r.mean_mse, r.mean_nscd, r.runs,
                      r.aborted);
        out += buf;
    }
    return out;
}

TrendCheck check_ablation_trend(const std::vector<AblationRow>& rows, double slack) {
    TrendCheck t;
    char buf[200];
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        if (t.nscd_non_increasing && !(b.mean_nscd <= (1.0 + slack) * a.mean_nscd)) {
            t.nscd_non_increasing = false;
            std::snprintf(buf, sizeof buf, "nscd rises from %.6e (lambda %g) to %.6e (lambda %g); ", a.mean_nscd,
                          a.lambda, b.mean_nscd, b.lambda);
            t.detail += buf;
        }
        if (t.mse_non_decreasing && !(b.mean_mse >= (1.0 - slack) * a.mean_mse)) {
            t.mse_non_decreasing = false;
            std::snprintf(buf, sizeof buf, "mse falls from %.6e (lambda %g) to %.6e (lambda %g); ", a.mean_mse,
                          a.lambda, b.mean_mse, b.lambda);
            t.detail += buf;
        }
    }
    return t;
}

}  // namespace lsap
