#include <cmath>
#include <fstream>
#include <map>

#include "lsap/error.hpp"
#include "lsap/inversion.hpp"
#include "lsap/parallel.hpp"
#include "lsap/rng.hpp"

namespace lsap {

std::vector<Tensor*> EncoderParams::tensors() {
    std::vector<Tensor*> out;
    for (auto& t : conv_w) out.push_back(&t);
    for (auto& t : conv_b) out.push_back(&t);
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
}

std::vector<const Tensor*> EncoderParams::tensors() const {
    std::vector<const Tensor*> out;
    for (const auto& t : conv_w) out.push_back(&t);
    for (const auto& t : conv_b) out.push_back(&t);
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
}

namespace {

constexpr std::size_t kBlocks = 4;

std::size_t flat_size(const Generator& gen) {
    std::size_t r = gen.config().resolution();
    for (std::size_t b = 0; b < kBlocks; ++b) r /= 2;
    return kEncoderChannels[kBlocks - 1] * r * r;
}

}  // namespace

EncoderParams init_encoder(const Generator& gen, const Tensor& w_mean, std::uint64_t seed) {
    const auto& c = gen.config();
    if (c.resolution() % (1u << kBlocks) != 0) throw ConfigError("encoder: resolution must be divisible by 16");
    if (w_mean.shape() != Shape{c.w_dim}) throw ShapeError("encoder: w_mean has wrong shape");
    EncoderParams p;
    p.num_layers = c.num_layers;
    p.w_dim = c.w_dim;
    Rng rng(seed, 0);
    const double lrelu_gain = std::sqrt(2.0 / (1.0 + 0.04));
    std::size_t in = 3;
    for (std::size_t b = 0; b < kBlocks; ++b) {
        const std::size_t out = kEncoderChannels[b];
        Tensor w = sample_standard_normal(rng, {out, in, 3, 3});
        const double s = lrelu_gain / std::sqrt(9.0 * static_cast<double>(in));
        for (auto& v : w.data()) v *= s;
        p.conv_w.push_back(std::move(w));
        p.conv_b.emplace_back(Shape{out}, 0.0);
        in = out;
    }
    const std::size_t flat = flat_size(gen);
    const std::size_t outputs = c.w_dim * (1 + c.num_layers);
    // A small head keeps the initial prediction near the mean code.
    p.head_w = sample_standard_normal(rng, {outputs, flat});
    for (auto& v : p.head_w.data()) v *= 0.1 / std::sqrt(static_cast<double>(flat));
    p.head_b = Tensor({outputs}, 0.0);
    for (std::size_t i = 0; i < c.w_dim; ++i) p.head_b[i] = w_mean[i];
    return p;
}

EncoderOutput encoder_forward(const std::vector<Var>& params, std::size_t num_layers, std::size_t w_dim,
                              Var image) {
    if (params.size() != 2 * kBlocks + 2) throw ShapeError("encoder: wrong parameter count");
    if (image.shape().size() != 3 || image.shape()[0] != 3) {
        throw ShapeError("encoder: image has shape " + shape_string(image.shape()));
    }
    Var x = image;
    for (std::size_t b = 0; b < kBlocks; ++b) {
        x = ops::bias_add(ops::conv2d_3x3(x, params[b]), params[kBlocks + b]);
        x = ops::avg_pool_2x(ops::leaky_relu(x, 0.2));
    }
    x = ops::reshape(x, {x.value().numel()});
    Var head = ops::add(ops::matvec(params[2 * kBlocks], x), params[2 * kBlocks + 1]);
    if (head.value().numel() != w_dim * (1 + num_layers)) throw ShapeError("encoder: head size mismatch");
    EncoderOutput out;
    out.base = ops::slice(head, 0, w_dim);
    std::vector<Var> rows;
    for (std::size_t l = 0; l < num_layers; ++l) {
        out.deltas.push_back(ops::slice(head, w_dim * (1 + l), w_dim));
        rows.push_back(ops::add(out.base, out.deltas.back()));
    }
    out.wplus = ops::stack_rows(rows);
    return out;
}

LatentCode invert_encode(const Tensor& target, const EncoderParams& enc) {
    if (target.rank() != 3 || target.dim(0) != 3) throw ShapeError("encode: target must be 3xHxW");
    Tape t;
    std::vector<Var> ps;
    for (const auto* p : enc.tensors()) ps.push_back(t.constant(*p));
    auto out = encoder_forward(ps, enc.num_layers, enc.w_dim, t.constant(target));
    return LatentCode::wplus(out.wplus.value());
}

void EncoderTrainConfig::validate() const {
    if (!(lambda >= 0.0) || !(lambda_dreg >= 0.0)) throw ConfigError("encoder loss weights must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("encoder learning rate must be > 0");
    if (batch_size == 0 || iterations == 0) throw ConfigError("batch size and iterations must be >= 1");
}

namespace {

struct SampleResult {
    std::vector<Tensor> grads;
    double loss = 0.0, mse = 0.0, nscd = 0.0, dreg = 0.0;
};

SampleResult train_sample(const Generator& gen, const MeanCode& mu, const EncoderParams& enc,
                          const Tensor& target, const EncoderTrainConfig& cfg) {
    Tape t;
    GeneratorGraph gg(gen, t);
    std::vector<Var> ps;
    for (const auto* p : enc.tensors()) ps.push_back(t.leaf(*p));
    auto out = encoder_forward(ps, enc.num_layers, enc.w_dim, t.constant(target));
    auto styles = gg.styles_from_wplus(out.wplus);
    Var mse = ops::mse(gg.synthesize(styles), t.constant(target));
    Var dreg;
    for (const auto& d : out.deltas) {
        Var n2 = ops::sum(ops::square(d));
        dreg = dreg.valid() ? ops::add(dreg, n2) : n2;
    }
    Var align = nscd_loss(styles, mu);
    Var total = ops::add(mse, ops::scale(dreg, cfg.lambda_dreg));
    if (cfg.lambda > 0.0) total = ops::add(total, ops::scale(align, cfg.lambda));
    t.backward(total);
    SampleResult r;
    for (const auto& p : ps) r.grads.push_back(t.grad(p));
    r.loss = total.value().item();
    r.mse = mse.value().item();
    r.nscd = align.value().item();
    r.dreg = dreg.value().item();
    return r;
}

}  // namespace

EncoderTrainReport train_encoder(const Generator& gen, const MeanCode& mu, const Tensor& w_mean,
                                 const EncoderTrainConfig& cfg) {
    cfg.validate();
    EncoderTrainReport report;
    report.encoder = init_encoder(gen, w_mean, cfg.seed);
    auto& enc = report.encoder;
    std::vector<Tensor> params;
    for (const auto* p : enc.tensors()) params.push_back(*p);
    Adam adam(AdamConfig{cfg.lr, 0.9, 0.999, 1e-8}, params);

    // Training images come from their own stream family so they never
    // coincide with held-out targets drawn from other seeds.
    const std::uint64_t image_seed = cfg.seed ^ 0x5eedf00dULL;
    double initial = 0.0;
    std::size_t over = 0;
    try {
        for (std::size_t it = 0; it < cfg.iterations; ++it) {
            std::vector<SampleResult> results(cfg.batch_size);
            parallel_for(cfg.batch_size, [&](std::size_t i) {
                std::uint64_t idx = it * cfg.batch_size + i;
                if (cfg.train_set_size > 0) idx %= cfg.train_set_size;
                const Tensor target = gen.generate_from_z(sample_z(gen, image_seed, idx));
                results[i] = train_sample(gen, mu, enc, target, cfg);
            });
            std::vector<Tensor> grads = results[0].grads;
            double loss = results[0].loss, mse = results[0].mse, nscd = results[0].nscd, dreg = results[0].dreg;
            for (std::size_t i = 1; i < results.size(); ++i) {
                for (std::size_t k = 0; k < grads.size(); ++k)
                    for (std::size_t j = 0; j < grads[k].numel(); ++j) grads[k][j] += results[i].grads[k][j];
                loss += results[i].loss;
                mse += results[i].mse;
                nscd += results[i].nscd;
                dreg += results[i].dreg;
            }
            const double inv = 1.0 / static_cast<double>(cfg.batch_size);
            for (auto& g : grads)
                for (auto& v : g.data()) v *= inv;
            report.loss.push_back(loss * inv);
            report.mse.push_back(mse * inv);
            report.nscd.push_back(nscd * inv);
            report.dreg.push_back(dreg * inv);

            if (it == 0) initial = report.loss.back();
            over = report.loss.back() > 10.0 * initial ? over + 1 : 0;
            if (over >= 100) {
                report.aborted = true;
                report.diagnostic = "diverged: loss above 10x its initial value for 100 iterations (iteration " +
                                    std::to_string(it) + ")";
                break;
            }
            adam.step(params, grads);
            auto slots = enc.tensors();
            for (std::size_t k = 0; k < slots.size(); ++k) *slots[k] = params[k];
        }
    } catch (const NumericError& e) {
        report.aborted = true;
        report.diagnostic = std::string("iteration ") + std::to_string(report.loss.size()) + ": " + e.what();
    }
    return report;
}

namespace {
constexpr std::uint32_t kEncoderVersion = 1;
}

void write_encoder(std::ostream& out, const EncoderParams& enc) {
    binio::write_magic(out, "LSAE");
    binio::write_u32(out, kEncoderVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(enc.num_layers));
    binio::write_u32(out, static_cast<std::uint32_t>(enc.w_dim));
    auto ts = enc.tensors();
    binio::write_u32(out, static_cast<std::uint32_t>(ts.size()));
    for (const auto* t : ts) write_tensor(out, *t);
}

EncoderParams read_encoder(std::istream& in) {
    binio::expect_magic(in, "LSAE");
    if (binio::read_u32(in) != kEncoderVersion) throw ConfigError("unsupported encoder checkpoint version");
    EncoderParams p;
    p.num_layers = binio::read_u32(in);
    p.w_dim = binio::read_u32(in);
    const auto n = binio::read_u32(in);
    if (n != 2 * kBlocks + 2) throw ConfigError("encoder checkpoint: wrong block count");
    p.conv_w.resize(kBlocks);
    p.conv_b.resize(kBlocks);
    for (auto* t : p.tensors()) *t = read_tensor(in);
    if (p.head_b.shape() != Shape{p.w_dim * (1 + p.num_layers)}) {
        throw ConfigError("encoder checkpoint: head does not match k and w_dim");
    }
    return p;
}

void save_encoder(const std::string& path, const EncoderParams& enc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    write_encoder(out, enc);
}

EncoderParams load_encoder(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open encoder checkpoint " + path);
    return read_encoder(in);
}

}  // namespace lsap
