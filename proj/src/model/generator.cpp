#include "lsap/generator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lsap/error.hpp"
#include "lsap/rng.hpp"

namespace lsap {

void GeneratorConfig::validate() const {
    if (num_layers == 0) throw ConfigError("generator: num_layers must be >= 1");
    if (z_dim == 0 || w_dim == 0) throw ConfigError("generator: latent dims must be positive");
    if (mapping_layers == 0) throw ConfigError("generator: mapping_layers must be >= 1");
    if (const_channels == 0 || const_resolution == 0) {
        throw ConfigError("generator: constant input must be non-empty");
    }
    if (channels.size() != num_layers) {
        throw ConfigError("generator: channels list must have num_layers entries");
    }
    for (std::size_t l = 0; l < num_layers; ++l) {
        if (channels[l] == 0) throw ConfigError("generator: zero channel count");
        if (emits_rgb_after(l) && channels[l] != style_dim(l)) {
            throw ConfigError("generator: layer " + std::to_string(l + 1) +
                              " feeds toRGB and must keep its channel count");
        }
    }
    if (!(epsilon >= 0.0)) throw ConfigError("generator: epsilon must be >= 0");
    if (!(affine_gain > 0.0) || !(rgb_gain > 0.0)) throw ConfigError("generator: gains must be > 0");
}

std::size_t GeneratorConfig::style_dim(std::size_t layer) const {
    return layer == 0 ? const_channels : channels[layer - 1];
}

bool GeneratorConfig::upsamples_before(std::size_t layer) const { return layer % 2 == 1; }

bool GeneratorConfig::emits_rgb_after(std::size_t layer) const {
    return layer % 2 == 0 || layer + 1 == num_layers;
}

std::size_t GeneratorConfig::resolution() const {
    std::size_t r = const_resolution;
    for (std::size_t l = 0; l < num_layers; ++l)
        if (upsamples_before(l)) r *= 2;
    return r;
}

namespace {

void expect_shape(const Tensor& t, const Shape& s, const std::string& what) {
    if (t.shape() != s) {
        throw ShapeError("generator: " + what + " has shape " + shape_string(t.shape()) +
                         ", expected " + shape_string(s));
    }
}

std::size_t rgb_tap_count(const GeneratorConfig& c) {
    std::size_t n = 0;
    for (std::size_t l = 0; l < c.num_layers; ++l) n += c.emits_rgb_after(l) ? 1 : 0;
    return n;
}

}  // namespace

Generator::Generator(GeneratorConfig config, GeneratorParams params)
    : config_(std::move(config)), params_(std::move(params)) {
    config_.validate();
    const auto& c = config_;
    if (params_.mapping_weight.size() != c.mapping_layers ||
        params_.mapping_bias.size() != c.mapping_layers) {
        throw ShapeError("generator: mapping layer count mismatch");
    }
    for (std::size_t i = 0; i < c.mapping_layers; ++i) {
        expect_shape(params_.mapping_weight[i], {c.w_dim, i == 0 ? c.z_dim : c.w_dim}, "mapping weight");
        expect_shape(params_.mapping_bias[i], {c.w_dim}, "mapping bias");
    }
    if (params_.affine_weight.size() != c.num_layers || params_.affine_bias.size() != c.num_layers ||
        params_.conv_weight.size() != c.num_layers) {
        throw ShapeError("generator: synthesis layer count mismatch");
    }
    for (std::size_t l = 0; l < c.num_layers; ++l) {
        expect_shape(params_.affine_weight[l], {c.style_dim(l), c.w_dim}, "affine weight");
        expect_shape(params_.affine_bias[l], {c.style_dim(l)}, "affine bias");
        expect_shape(params_.conv_weight[l], {c.channels[l], c.style_dim(l), 3, 3}, "conv weight");
    }
    expect_shape(params_.const_input, {c.const_channels, c.const_resolution, c.const_resolution},
                 "constant input");
    if (params_.to_rgb.size() != rgb_tap_count(c)) throw ShapeError("generator: toRGB count mismatch");
    std::size_t tap = 0;
    for (std::size_t l = 0; l < c.num_layers; ++l) {
        if (c.emits_rgb_after(l)) expect_shape(params_.to_rgb[tap++], {3, c.channels[l]}, "toRGB weight");
    }
}

Generator Generator::random(const GeneratorConfig& config, std::uint64_t seed) {
    config.validate();
    const auto& c = config;
    GeneratorParams p;
    // One stream per parameter group keeps groups independent of each other's sizes.
    Rng map_rng(seed, 1), aff_rng(seed, 2), conv_rng(seed, 3), const_rng(seed, 4), rgb_rng(seed, 5);
    const double lrelu_gain = std::sqrt(2.0 / (1.0 + c.lrelu_slope * c.lrelu_slope));
    for (std::size_t i = 0; i < c.mapping_layers; ++i) {
        const std::size_t in = i == 0 ? c.z_dim : c.w_dim;
        Tensor w = sample_standard_normal(map_rng, {c.w_dim, in});
        const double s = lrelu_gain / std::sqrt(static_cast<double>(in));
        for (auto& v : w.data()) v *= s;
        p.mapping_weight.push_back(std::move(w));
        Tensor b = sample_standard_normal(map_rng, {c.w_dim});
        for (auto& v : b.data()) v *= 0.1;
        p.mapping_bias.push_back(std::move(b));
    }
    for (std::size_t l = 0; l < c.num_layers; ++l) {
        Tensor a = sample_standard_normal(aff_rng, {c.style_dim(l), c.w_dim});
        const double s = c.affine_gain / std::sqrt(static_cast<double>(c.w_dim));
        for (auto& v : a.data()) v *= s;
        p.affine_weight.push_back(std::move(a));
        p.affine_bias.emplace_back(Shape{c.style_dim(l)}, 1.0);
        p.conv_weight.push_back(sample_standard_normal(conv_rng, {c.channels[l], c.style_dim(l), 3, 3}));
        if (c.emits_rgb_after(l)) p.to_rgb.push_back(sample_standard_normal(rgb_rng, {3, c.channels[l]}));
    }
    p.const_input =
        sample_standard_normal(const_rng, {c.const_channels, c.const_resolution, c.const_resolution});
    return Generator(config, std::move(p));
}

Shape Generator::image_shape() const {
    return {3, config_.resolution(), config_.resolution()};
}

std::vector<std::size_t> Generator::style_dims() const {
    std::vector<std::size_t> d;
    for (std::size_t l = 0; l < config_.num_layers; ++l) d.push_back(config_.style_dim(l));
    return d;
}

Generator Generator::with_epsilon(double eps) const {
    GeneratorConfig c = config_;
    c.epsilon = eps;
    return Generator(c, params_);
}

Generator Generator::with_affine(std::size_t layer, Tensor weight, Tensor bias) const {
    if (layer >= config_.num_layers) throw ShapeError("with_affine: layer out of range");
    GeneratorParams p = params_;
    p.affine_weight[layer] = std::move(weight);
    p.affine_bias[layer] = std::move(bias);
    return Generator(config_, std::move(p));
}

void Generator::validate_styles(const StyleSet& styles) const {
    if (styles.size() != config_.num_layers) {
        throw ShapeError("style set has " + std::to_string(styles.size()) + " layers, expected " +
                         std::to_string(config_.num_layers));
    }
    for (std::size_t l = 0; l < styles.size(); ++l) {
        expect_shape(styles[l], {config_.style_dim(l)}, "style " + std::to_string(l));
    }
}

Tensor Generator::mapping(const Tensor& z) const {
    Tape t;
    GeneratorGraph g(*this, t);
    return g.mapping(t.constant(z)).value();
}

Tensor Generator::affine(const Tensor& w, std::size_t layer) const {
    Tape t;
    GeneratorGraph g(*this, t);
    return g.affine(t.constant(w), layer).value();
}

StyleSet Generator::styles_from_w(const Tensor& w) const {
    Tape t;
    GeneratorGraph g(*this, t);
    StyleSet out;
    for (auto v : g.styles_from_w(t.constant(w))) out.push_back(v.value());
    return out;
}

StyleSet Generator::styles_from_wplus(const Tensor& wplus) const {
    Tape t;
    GeneratorGraph g(*this, t);
    StyleSet out;
    for (auto v : g.styles_from_wplus(t.constant(wplus))) out.push_back(v.value());
    return out;
}

Tensor Generator::synthesize(const StyleSet& styles) const {
    validate_styles(styles);
    Tape t;
    GeneratorGraph g(*this, t);
    std::vector<Var> s;
    for (const auto& v : styles) s.push_back(t.constant(v));
    return g.synthesize(s).value();
}

Tensor Generator::generate_from_z(const Tensor& z) const {
    Tape t;
    GeneratorGraph g(*this, t);
    return g.generate_from_z(t.constant(z)).value();
}

Tensor Generator::generate_from_w(const Tensor& w) const {
    Tape t;
    GeneratorGraph g(*this, t);
    return g.synthesize(g.styles_from_w(t.constant(w))).value();
}

Tensor Generator::generate_from_wplus(const Tensor& wplus) const {
    Tape t;
    GeneratorGraph g(*this, t);
    return g.synthesize(g.styles_from_wplus(t.constant(wplus))).value();
}

Tensor modulate_demodulate(const Tensor& weight, const Tensor& style, double eps) {
    Tape t;
    return ops::demodulate(ops::modulate(t.constant(weight), t.constant(style)), eps).value();
}

GeneratorGraph::GeneratorGraph(const Generator& gen, Tape& tape) : gen_(&gen), tape_(&tape) {
    const auto& p = gen.params();
    for (const auto& w : p.mapping_weight) map_w_.push_back(tape.constant(w));
    for (const auto& b : p.mapping_bias) map_b_.push_back(tape.constant(b));
    for (const auto& a : p.affine_weight) aff_w_.push_back(tape.constant(a));
    for (const auto& b : p.affine_bias) aff_b_.push_back(tape.constant(b));
    for (const auto& w : p.conv_weight) conv_w_.push_back(tape.constant(w));
    for (const auto& w : p.to_rgb) rgb_w_.push_back(tape.constant(w));
    const_input_ = tape.constant(p.const_input);
}

Var GeneratorGraph::mapping(Var z) const {
    const auto& c = gen_->config();
    if (z.shape() != Shape{c.z_dim}) {
        throw ShapeError("mapping: z has shape " + shape_string(z.shape()) + ", expected [" +
                         std::to_string(c.z_dim) + "]");
    }
    Var h = z;
    for (std::size_t i = 0; i < map_w_.size(); ++i) {
        h = ops::leaky_relu(ops::add(ops::matvec(map_w_[i], h), map_b_[i]), c.lrelu_slope);
    }
    return h;
}

Var GeneratorGraph::affine(Var w, std::size_t layer) const {
    const auto& c = gen_->config();
    if (layer >= c.num_layers) {
        throw ShapeError("affine: layer " + std::to_string(layer) + " out of range");
    }
    if (w.shape() != Shape{c.w_dim}) throw ShapeError("affine: w has shape " + shape_string(w.shape()));
    return ops::add(ops::matvec(aff_w_[layer], w), aff_b_[layer]);
}

std::vector<Var> GeneratorGraph::styles_from_w(Var w) const {
    std::vector<Var> s;
    for (std::size_t l = 0; l < gen_->num_layers(); ++l) s.push_back(affine(w, l));
    return s;
}

std::vector<Var> GeneratorGraph::styles_from_wplus(Var wplus) const {
    const auto& c = gen_->config();
    if (wplus.shape() != Shape{c.num_layers, c.w_dim}) {
        throw ShapeError("W+ code has shape " + shape_string(wplus.shape()));
    }
    std::vector<Var> s;
    for (std::size_t l = 0; l < c.num_layers; ++l) s.push_back(affine(ops::row(wplus, l), l));
    return s;
}

Var GeneratorGraph::synthesize(const std::vector<Var>& styles) const {
    const auto& c = gen_->config();
    if (styles.size() != c.num_layers) {
        throw ShapeError("synthesize: got " + std::to_string(styles.size()) + " style vectors");
    }
    for (std::size_t l = 0; l < styles.size(); ++l) {
        if (styles[l].shape() != Shape{c.style_dim(l)}) {
            throw ShapeError("synthesize: style " + std::to_string(l) + " has shape " +
                             shape_string(styles[l].shape()));
        }
    }
    Var x = const_input_;
    Var rgb;
    std::size_t tap = 0;
    for (std::size_t l = 0; l < c.num_layers; ++l) {
        if (c.upsamples_before(l)) x = ops::upsample_nearest_2x(x);
        Var kernel = ops::demodulate(ops::modulate(conv_w_[l], styles[l]), c.epsilon);
        x = ops::leaky_relu(ops::conv2d_3x3(x, kernel), c.lrelu_slope);
        if (!c.emits_rgb_after(l)) continue;
        Var rgb_kernel = ops::demodulate(ops::modulate(rgb_w_[tap++], styles[l]), c.epsilon);
        const std::size_t ch = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
        Var contrib = ops::reshape(ops::matmul(rgb_kernel, ops::reshape(x, {ch, h * w})), {3, h, w});
        if (!rgb.valid()) {
            rgb = contrib;
        } else {
            if (rgb.shape()[1] != h) rgb = ops::upsample_nearest_2x(rgb);
            rgb = ops::add(rgb, contrib);
        }
    }
    return ops::scale(rgb, c.rgb_gain);
}

Var GeneratorGraph::generate_from_z(Var z) const { return synthesize(styles_from_w(mapping(z))); }

namespace {

constexpr std::uint32_t kGeneratorVersion = 1;

std::vector<std::pair<std::string, const Tensor*>> named_blocks(const GeneratorParams& p) {
    std::vector<std::pair<std::string, const Tensor*>> blocks;
    for (std::size_t i = 0; i < p.mapping_weight.size(); ++i) {
        blocks.emplace_back("mapping." + std::to_string(i) + ".weight", &p.mapping_weight[i]);
        blocks.emplace_back("mapping." + std::to_string(i) + ".bias", &p.mapping_bias[i]);
    }
    for (std::size_t l = 0; l < p.affine_weight.size(); ++l) {
        blocks.emplace_back("affine." + std::to_string(l) + ".weight", &p.affine_weight[l]);
        blocks.emplace_back("affine." + std::to_string(l) + ".bias", &p.affine_bias[l]);
        blocks.emplace_back("conv." + std::to_string(l) + ".weight", &p.conv_weight[l]);
    }
    blocks.emplace_back("const", &p.const_input);
    for (std::size_t t = 0; t < p.to_rgb.size(); ++t) {
        blocks.emplace_back("to_rgb." + std::to_string(t) + ".weight", &p.to_rgb[t]);
    }
    return blocks;
}

}  // namespace

void write_generator(std::ostream& out, const Generator& gen) {
    const auto& c = gen.config();
    binio::write_magic(out, "LSAG");
    binio::write_u32(out, kGeneratorVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(c.num_layers));
    binio::write_u32(out, static_cast<std::uint32_t>(c.z_dim));
    binio::write_u32(out, static_cast<std::uint32_t>(c.w_dim));
    binio::write_u32(out, static_cast<std::uint32_t>(c.mapping_layers));
    binio::write_u32(out, static_cast<std::uint32_t>(c.const_channels));
    binio::write_u32(out, static_cast<std::uint32_t>(c.const_resolution));
    for (auto ch : c.channels) binio::write_u32(out, static_cast<std::uint32_t>(ch));
    binio::write_f64(out, c.epsilon);
    binio::write_f64(out, c.affine_gain);
    binio::write_f64(out, c.rgb_gain);
    binio::write_f64(out, c.lrelu_slope);
    auto blocks = named_blocks(gen.params());
    binio::write_u32(out, static_cast<std::uint32_t>(blocks.size()));
    for (const auto& [name, t] : blocks) {
        binio::write_string(out, name);
        write_tensor(out, *t);
    }
}

Generator read_generator(std::istream& in) {
    binio::expect_magic(in, "LSAG");
    auto version = binio::read_u32(in);
    if (version != kGeneratorVersion) {
        throw ConfigError("unsupported generator checkpoint version " + std::to_string(version));
    }
    GeneratorConfig c;
    c.num_layers = binio::read_u32(in);
    if (c.num_layers == 0 || c.num_layers > 64) throw ConfigError("generator checkpoint: bad layer count");
    c.z_dim = binio::read_u32(in);
    c.w_dim = binio::read_u32(in);
    c.mapping_layers = binio::read_u32(in);
    c.const_channels = binio::read_u32(in);
    c.const_resolution = binio::read_u32(in);
    c.channels.resize(c.num_layers);
    for (auto& ch : c.channels) ch = binio::read_u32(in);
    c.epsilon = binio::read_f64(in);
    c.affine_gain = binio::read_f64(in);
    c.rgb_gain = binio::read_f64(in);
    c.lrelu_slope = binio::read_f64(in);
    c.validate();

    std::map<std::string, Tensor> blocks;
    const auto count = binio::read_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        auto name = binio::read_string(in);
        blocks[name] = read_tensor(in);
    }
    auto take = [&](const std::string& name) {
        auto it = blocks.find(name);
        if (it == blocks.end()) throw ConfigError("generator checkpoint: missing block " + name);
        return it->second;
    };
    GeneratorParams p;
    for (std::size_t i = 0; i < c.mapping_layers; ++i) {
        p.mapping_weight.push_back(take("mapping." + std::to_string(i) + ".weight"));
        p.mapping_bias.push_back(take("mapping." + std::to_string(i) + ".bias"));
    }
    std::size_t taps = 0;
    for (std::size_t l = 0; l < c.num_layers; ++l) {
        p.affine_weight.push_back(take("affine." + std::to_string(l) + ".weight"));
        p.affine_bias.push_back(take("affine." + std::to_string(l) + ".bias"));
        p.conv_weight.push_back(take("conv." + std::to_string(l) + ".weight"));
        if (c.emits_rgb_after(l)) p.to_rgb.push_back(take("to_rgb." + std::to_string(taps++) + ".weight"));
    }
    p.const_input = take("const");
    return Generator(c, std::move(p));
}

void save_generator(const std::string& path, const Generator& gen) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    write_generator(out, gen);
}

Generator load_generator(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open generator checkpoint " + path);
    return read_generator(in);
}

std::string generator_checksum(const Generator& gen) {
    std::ostringstream os;
    write_generator(os, gen);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : os.str()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace lsap
