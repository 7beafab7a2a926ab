#include "commands.hpp"

#include <cstdio>
#include <iostream>

#include <json.hpp>

#include "lsap/editing.hpp"
#include "lsap/error.hpp"
#include "lsap/inversion.hpp"
#include "lsap/properties.hpp"
#include "outputs.hpp"
#include "png.hpp"

namespace lsap::cli {

namespace {

using ojson = nlohmann::ordered_json;

void write_json(const Outputs& out, const std::string& name, const ojson& j) {
    out.write_text(name, j.dump(2) + "\n");
}

ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

Generator load_gen(const Paths& p) {
    return load_generator(p.resolve(p.generator, "generator.lsag"));
}

MeanCode load_mc(const Paths& p, const Generator& gen) {
    MeanCode mc = load_mean_code(p.resolve(p.mean_code, "mean_code.lsam"));
    if (mc.generator_checksum != generator_checksum(gen)) {
        throw ConfigError("mean code was estimated for a different generator (" + mc.generator_checksum + ")");
    }
    return mc;
}

Tensor load_wbar(const Paths& p, const Generator& gen) {
    Tensor w = load_tensor(p.resolve(p.w_mean, "w_mean.lsat"));
    if (w.shape() != Shape{gen.config().w_dim}) throw ShapeError("w_mean has shape " + shape_string(w.shape()));
    return w;
}

Tensor image_at(const Tensor& stack, std::size_t i) {
    const Shape& s = stack.shape();
    const std::size_t n = s[1] * s[2] * s[3];
    std::vector<double> v(stack.values().begin() + static_cast<std::ptrdiff_t>(i * n),
                          stack.values().begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    return Tensor({s[1], s[2], s[3]}, std::move(v));
}

std::vector<Tensor> load_targets(const Generator& gen, const TargetSource& t) {
    std::vector<Tensor> out;
    if (t.file.empty()) {
        for (std::size_t i = 0; i < t.count; ++i) out.push_back(gen.generate_from_z(sample_z(gen, t.seed, t.first + i)));
        return out;
    }
    Tensor x = load_tensor(t.file);
    if (x.rank() == 3) {
        if (t.index && *t.index != 0) throw ConfigError("--index given for a single-image target file");
        out.push_back(std::move(x));
    } else if (x.rank() == 4) {
        if (t.index) {
            if (*t.index >= x.dim(0)) throw ConfigError("--index out of range");
            out.push_back(image_at(x, *t.index));
        } else {
            for (std::size_t i = 0; i < x.dim(0); ++i) out.push_back(image_at(x, i));
        }
    } else {
        throw ShapeError("target file must hold [3,H,W] or [N,3,H,W], got " + shape_string(x.shape()));
    }
    for (const auto& img : out) {
        if (img.shape() != gen.image_shape()) throw ShapeError("target has shape " + shape_string(img.shape()));
        if (!img.all_finite()) throw NumericError("target image has non-finite pixels");
    }
    return out;
}

Tensor stack(const std::vector<Tensor>& images) {
    Shape s{images.size()};
    for (auto d : images.front().shape()) s.push_back(d);
    std::vector<double> v;
    v.reserve(shape_numel(s));
    for (const auto& img : images) v.insert(v.end(), img.values().begin(), img.values().end());
    return Tensor(s, std::move(v));
}

double mse(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.numel());
}

// Any code as a W, W+, S or SN code (Z is mapped).
LatentCode without_z(const Generator& gen, const LatentCode& c) {
    return c.space() == Space::Z ? LatentCode::w(gen.mapping(c.vec())) : c;
}

LatentCode as_sn(const Generator& gen, const LatentCode& code) {
    LatentCode c = without_z(gen, code);
    if (c.space() == Space::W || c.space() == Space::Wplus) c = to_style(gen, c);
    return c.space() == Space::SN ? c : normalize_style(c);
}

ojson nscd_json(const NscdValue& v) {
    ojson j;
    j["value"] = num(v.value);
    ojson layers = ojson::array();
    for (double d : v.per_layer) layers.push_back(num(d));
    j["per_layer"] = layers;
    return j;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

std::string Paths::resolve(const std::string& explicit_path, const char* standard_name) const {
    if (!explicit_path.empty()) return explicit_path;
    return ((in.empty() ? out : in) + "/") + standard_name;
}

void cmd_print_config(const RunConfig& cfg) { std::cout << dump_run_config(cfg); }

void cmd_init_gen(const RunConfig& cfg, const Paths& p) {
    Outputs out(p.out);
    const Generator gen = Generator::random(cfg.generator, cfg.seed);
    save_generator(out.path("generator.lsag"), gen);
    ojson j;
    j["seed"] = cfg.seed;
    j["checksum"] = generator_checksum(gen);
    j["style_dims"] = gen.style_dims();
    j["image_shape"] = gen.image_shape();
    write_json(out, "generator.json", j);
    out.commit();
}

void cmd_mean_code(const RunConfig& cfg, const Paths& p) {
    const Generator gen = load_gen(p);
    Outputs out(p.out);
    const MeanCode mc = estimate_mean_code(gen, cfg.mean_code.k_samples, cfg.mean_code.seed);
    save_mean_code(out.path("mean_code.lsam"), mc);
    save_tensor(out.path("w_mean.lsat"),
                estimate_mean_w(gen, cfg.mean_code.w_mean_samples, cfg.mean_code.w_mean_seed));
    out.commit();
}

void cmd_sample(const RunConfig& cfg, const Paths& p) {
    const Generator gen = load_gen(p);
    Outputs out(p.out);
    const auto& s = cfg.sample;
    std::vector<LatentCode> codes;
    std::vector<Tensor> images;
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < s.count; ++i) {
        const Tensor z = sample_z(gen, s.seed, i);
        const Tensor w = gen.mapping(z);
        switch (s.space) {
            case Space::Z: codes.push_back(LatentCode::z(z)); break;
            case Space::W: codes.push_back(LatentCode::w(w)); break;
            case Space::Wplus: codes.push_back(broadcast_wplus(LatentCode::w(w), gen.num_layers())); break;
            case Space::S: codes.push_back(to_style(gen, LatentCode::w(w))); break;
            case Space::SN: codes.push_back(normalize_style(to_style(gen, LatentCode::w(w)))); break;
        }
        images.push_back(gen.generate_from_w(w));
        char name[32];
        std::snprintf(name, sizeof name, "sample_%03zu.png", i);
        clamped += write_png(out.path(name), images.back());
    }
    save_codes(out.path("codes.lsac"), codes);
    save_tensor(out.path("images.lsat"), stack(images));
    ojson j;
    j["count"] = s.count;
    j["seed"] = s.seed;
    j["space"] = space_name(s.space);
    j["generator_checksum"] = generator_checksum(gen);
    j["clamped_pixels"] = clamped;
    write_json(out, "samples.json", j);
    out.commit();
}

void cmd_invert(const RunConfig& cfg, const Paths& p, const TargetSource& t) {
    const Generator gen = load_gen(p);
    const MeanCode mc = load_mc(p, gen);
    const Tensor wbar = load_wbar(p, gen);
    auto targets = load_targets(gen, t);
    if (targets.size() != 1) throw ConfigError("invert takes one target; use --index with a stacked file");
    Outputs out(p.out);
    const auto& ic = cfg.inversion;
    auto r = invert_optimize(targets[0], gen, mc, wbar, ic);
    if (r.aborted) throw NumericError("inversion aborted: " + r.diagnostic);

    save_codes(out.path("code.lsac"), {r.code});
    std::string csv = "step,image_loss,nscd\n";
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
        csv += std::to_string(i) + "," + fmt("%.12e", r.trajectory[i].image_loss) + "," +
               fmt("%.12e", r.trajectory[i].nscd) + "\n";
    }
    out.write_text("trajectory.csv", csv);
    std::size_t clamped = write_png(out.path("inverted.png"), generate(gen, r.code));
    clamped += write_png(out.path("target.png"), targets[0]);

    ojson j;
    j["space"] = space_name(ic.space);
    j["lambda"] = ic.lambda;
    j["preset_lambda"] = InversionConfig::preset_lambda(ic.space);
    j["toy_lambda"] = InversionConfig::toy_lambda(ic.space);
    j["alignment_term"] = ic.alignment_term;
    j["loss"] = image_loss_name(ic.loss);
    j["steps"] = r.trajectory.size();
    j["final_mse"] = num(r.final_mse);
    j["final_nscd"] = num(r.final_nscd);
    j["clamped_pixels"] = clamped;
    write_json(out, "report.json", j);
    out.commit();
}

void cmd_train_encoder(const RunConfig& cfg, const Paths& p) {
    const Generator gen = load_gen(p);
    const MeanCode mc = load_mc(p, gen);
    const Tensor wbar = load_wbar(p, gen);
    Outputs out(p.out);
    auto r = train_encoder(gen, mc, wbar, cfg.encoder);
    if (r.aborted) throw NumericError("encoder training aborted: " + r.diagnostic);
    save_encoder(out.path("encoder.lsae"), r.encoder);
    std::string csv = "iteration,loss,mse,nscd,dreg\n";
    for (std::size_t i = 0; i < r.loss.size(); ++i) {
        csv += std::to_string(i) + "," + fmt("%.12e", r.loss[i]) + "," + fmt("%.12e", r.mse[i]) + "," +
               fmt("%.12e", r.nscd[i]) + "," + fmt("%.12e", r.dreg[i]) + "\n";
    }
    out.write_text("training.csv", csv);
    ojson j;
    j["lambda"] = cfg.encoder.lambda;
    j["lambda_dreg"] = cfg.encoder.lambda_dreg;
    j["iterations"] = r.loss.size();
    j["batch_size"] = cfg.encoder.batch_size;
    j["final_loss"] = num(r.loss.back());
    j["final_mse"] = num(r.mse.back());
    j["final_nscd"] = num(r.nscd.back());
    write_json(out, "train_report.json", j);
    out.commit();
}

void cmd_encode(const RunConfig&, const Paths& p, const TargetSource& t) {
    const Generator gen = load_gen(p);
    const MeanCode mc = load_mc(p, gen);
    const EncoderParams enc = load_encoder(p.resolve(p.encoder, "encoder.lsae"));
    const auto targets = load_targets(gen, t);
    Outputs out(p.out);
    std::vector<LatentCode> codes;
    double total = 0.0;
    for (const auto& x : targets) {
        codes.push_back(invert_encode(x, enc));
        codes.back().validate(gen);
        total += mse(generate(gen, codes.back()), x);
    }
    save_codes(out.path("codes.lsac"), codes);
    ojson j;
    j["count"] = codes.size();
    j["mean_mse"] = num(total / static_cast<double>(codes.size()));
    j["nscd"] = nscd_json(nscd(gen, codes, mc));
    write_json(out, "encode_report.json", j);
    out.commit();
}

void cmd_nscd(const RunConfig&, const Paths& p, const std::string& codes_path, bool self) {
    const Generator gen = load_gen(p);
    const MeanCode mc = load_mc(p, gen);
    std::vector<LatentCode> codes;
    if (self) {
        codes.push_back(LatentCode::sn(mc.mu));
    } else {
        if (codes_path.empty()) throw ConfigError("nscd needs --codes or --self");
        for (const auto& c : load_codes(codes_path)) codes.push_back(without_z(gen, c));
    }
    Outputs out(p.out);
    ojson j = nscd_json(nscd(gen, codes, mc));
    j["count"] = codes.size();
    j["mean_code_k"] = mc.k_samples;
    write_json(out, "nscd.json", j);
    out.commit();
}

void cmd_direction(const RunConfig& cfg, const Paths& p) {
    const Generator gen = load_gen(p);
    Outputs out(p.out);
    const auto& e = cfg.editing;
    auto d = find_direction(gen, attribute_by_name(e.attribute), e.n_samples, e.seed);
    save_direction(out.path("direction.json"), d);
    out.commit();
}

void cmd_edit(const RunConfig& cfg, const Paths& p, const std::string& codes_path, std::size_t index) {
    const Generator gen = load_gen(p);
    const EditDirection d = load_direction(p.resolve(p.direction, "direction.json"));
    if (codes_path.empty()) throw ConfigError("edit needs --codes");
    const auto codes = load_codes(codes_path);
    if (index >= codes.size()) throw ConfigError("--index out of range");
    const LatentCode c = without_z(gen, codes[index]);
    const LatentCode e = edit(c, d, cfg.editing.alpha);
    Outputs out(p.out);
    save_codes(out.path("edited_code.lsac"), {e});
    const Tensor before = generate(gen, c), after = generate(gen, e);
    std::size_t clamped = write_png(out.path("original.png"), before);
    clamped += write_png(out.path("edited.png"), after);
    const auto attr = attribute_by_name(d.attribute);
    ojson j;
    j["alpha"] = cfg.editing.alpha;
    j["attribute"] = d.attribute;
    j["attribute_before"] = num(attr(before));
    j["attribute_after"] = num(attr(after));
    j["clamped_pixels"] = clamped;
    write_json(out, "edit_report.json", j);
    out.commit();
}

void cmd_lec(const RunConfig& cfg, const Paths& p, const TargetSource& t) {
    const Generator gen = load_gen(p);
    const EncoderParams enc = load_encoder(p.resolve(p.encoder, "encoder.lsae"));
    const EditDirection d = load_direction(p.resolve(p.direction, "direction.json"));
    const auto targets = load_targets(gen, t);
    Outputs out(p.out);
    Embedder embed = [&](const Tensor& x) { return invert_encode(x, enc); };
    const auto r = lec(gen, embed, d, cfg.editing.alpha, targets);
    out.write_text("lec.csv", lec_csv(r));
    ojson j;
    j["alpha"] = cfg.editing.alpha;
    j["attribute"] = d.attribute;
    j["count"] = targets.size();
    j["flagged"] = r.flagged;
    j["mean_lec"] = num(r.mean_lec);
    j["mean_revert_mse"] = num(r.mean_revert_mse);
    write_json(out, "lec_report.json", j);
    out.commit();
}

void cmd_ablate(const RunConfig& cfg, const Paths& p) {
    const Generator gen = load_gen(p);
    const MeanCode mc = load_mc(p, gen);
    const Tensor wbar = load_wbar(p, gen);
    Outputs out(p.out);
    const auto& a = cfg.ablation;
    const auto rows = ablate_lambda(a.lambdas, a.n_targets, cfg.inversion, gen, mc, wbar, a.target_seed);
    out.write_text("table5_trend.csv", ablation_csv(rows));
    const auto trend = check_ablation_trend(rows, 0.05);
    ojson j;
    j["space"] = space_name(cfg.inversion.space);
    j["steps"] = cfg.inversion.steps;
    j["n_targets"] = a.n_targets;
    j["preset_lambda"] = InversionConfig::preset_lambda(cfg.inversion.space);
    j["toy_lambda"] = InversionConfig::toy_lambda(cfg.inversion.space);
    j["nscd_non_increasing"] = trend.nscd_non_increasing;
    j["mse_non_decreasing"] = trend.mse_non_decreasing;
    std::size_t aborted = 0;
    for (const auto& r : rows) aborted += r.aborted;
    j["aborted_runs"] = aborted;
    if (!trend.detail.empty()) j["detail"] = trend.detail;
    write_json(out, "ablation_report.json", j);
    out.commit();
}

void cmd_props(const RunConfig& cfg, const Paths& p) {
    const Generator gen = load_gen(p);
    Outputs out(p.out);
    out.write_text("properties_report.json", properties_json(run_property_suite(gen, cfg.properties_seed)));
    out.commit();
}

void cmd_project(const RunConfig&, const Paths& p, const std::string& codes_path) {
    const Generator gen = load_gen(p);
    if (codes_path.empty()) throw ConfigError("project needs --codes");
    std::vector<LatentCode> sn;
    for (const auto& c : load_codes(codes_path)) sn.push_back(as_sn(gen, c));
    Outputs out(p.out);
    out.write_text("projection.csv", projection_csv(project_2d(sn)));
    out.commit();
}

}  // namespace lsap::cli
