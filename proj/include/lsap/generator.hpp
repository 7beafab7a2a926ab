#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lsap/ops.hpp"
#include "lsap/tensor.hpp"

namespace lsap {

// Architecture of the toy style-based generator. Layer l (1-based) is a
// weight-demodulated 3x3 conv driven by style s_l = A_l w + b_l, whose length
// is the conv's input channel count. Feature maps are upsampled before every
// even layer; a modulated+demodulated 1x1 toRGB taps the features after every
// odd layer and after the last one, and the RGB skips are summed with
// nearest-neighbour upsampling.
struct GeneratorConfig {
    std::size_t num_layers = 6;
    std::size_t z_dim = 32;
    std::size_t w_dim = 32;
    std::size_t mapping_layers = 3;
    std::size_t const_channels = 16;
    std::size_t const_resolution = 4;
    // Output channels per layer. A layer feeding toRGB must keep its channel
    // count, since its toRGB is modulated by the same style vector.
    std::vector<std::size_t> channels = {16, 16, 16, 8, 8, 8};
    double epsilon = 1e-8;
    double affine_gain = 0.5;
    double rgb_gain = 0.8;
    double lrelu_slope = 0.2;

    // Throws ConfigError on inconsistent settings.
    void validate() const;
    std::size_t style_dim(std::size_t layer) const;  // 0-based layer index
    std::size_t resolution() const;
    bool upsamples_before(std::size_t layer) const;  // 0-based
    bool emits_rgb_after(std::size_t layer) const;   // 0-based
};

struct GeneratorParams {
    std::vector<Tensor> mapping_weight;  // [w_dim, in]
    std::vector<Tensor> mapping_bias;    // [w_dim]
    std::vector<Tensor> affine_weight;   // A_l: [style_dim(l), w_dim]
    std::vector<Tensor> affine_bias;     // b_l: [style_dim(l)]
    std::vector<Tensor> conv_weight;     // [out, in, 3, 3]
    Tensor const_input;                  // [const_channels, res, res]
    std::vector<Tensor> to_rgb;          // [3, channels] per RGB tap
};

// A set of per-layer style vectors (one S-space code).
using StyleSet = std::vector<Tensor>;

// The toy generator: mapping Z->W, affine W->S, synthesis S->image.
// Immutable after construction and safe to share between threads.
class Generator {
public:
    Generator(GeneratorConfig config, GeneratorParams params);

    // He-style random initialisation from a fixed seed.
    static Generator random(const GeneratorConfig& config, std::uint64_t seed);

    const GeneratorConfig& config() const { return config_; }
    const GeneratorParams& params() const { return params_; }
    std::size_t num_layers() const { return config_.num_layers; }
    Shape image_shape() const;
    std::vector<std::size_t> style_dims() const;

    // Same generator with a different demodulation epsilon.
    Generator with_epsilon(double eps) const;
    // Same generator with affine l (0-based) replaced; used for rank-deficient fixtures.
    Generator with_affine(std::size_t layer, Tensor weight, Tensor bias) const;

    Tensor mapping(const Tensor& z) const;
    Tensor affine(const Tensor& w, std::size_t layer) const;
    StyleSet styles_from_w(const Tensor& w) const;
    StyleSet styles_from_wplus(const Tensor& wplus) const;
    Tensor synthesize(const StyleSet& styles) const;
    Tensor generate_from_z(const Tensor& z) const;
    Tensor generate_from_w(const Tensor& w) const;
    Tensor generate_from_wplus(const Tensor& wplus) const;

    void validate_styles(const StyleSet& styles) const;

private:
    GeneratorConfig config_;
    GeneratorParams params_;
};

// W'' = demodulate(modulate(W, s), eps).
Tensor modulate_demodulate(const Tensor& weight, const Tensor& style, double eps);

// Binds a generator's weights to a tape as constants so its stages can be
// composed with other differentiable code.
class GeneratorGraph {
public:
    GeneratorGraph(const Generator& gen, Tape& tape);

    Tape& tape() const { return *tape_; }
    const Generator& generator() const { return *gen_; }

    Var mapping(Var z) const;
    Var affine(Var w, std::size_t layer) const;
    std::vector<Var> styles_from_w(Var w) const;
    std::vector<Var> styles_from_wplus(Var wplus) const;
    Var synthesize(const std::vector<Var>& styles) const;
    Var generate_from_z(Var z) const;

private:
    const Generator* gen_;
    Tape* tape_;
    std::vector<Var> map_w_, map_b_, aff_w_, aff_b_, conv_w_, rgb_w_;
    Var const_input_;
};

// Checkpoint: "LSAG", u32 version, u32 header fields, f64 scalars, then named
// tensor blocks in the LSAT format.
void write_generator(std::ostream& out, const Generator& gen);
Generator read_generator(std::istream& in);
void save_generator(const std::string& path, const Generator& gen);
Generator load_generator(const std::string& path);

// FNV-1a 64 of the checkpoint bytes, as 16 hex digits.
std::string generator_checksum(const Generator& gen);

}  // namespace lsap
