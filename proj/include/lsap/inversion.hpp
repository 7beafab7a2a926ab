#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lsap/adam.hpp"
#include "lsap/alignment.hpp"

namespace lsap {

enum class ImageLoss { MSE, L1 };

std::string image_loss_name(ImageLoss k);
ImageLoss parse_image_loss(const std::string& name);

// Image-level reconstruction loss on the tape.
Var image_loss(ImageLoss kind, Var image, Var target);

struct InversionConfig {
    Space space = Space::Wplus;
    double lambda = 20.0;
    std::size_t steps = 200;
    AdamConfig adam{0.05, 0.9, 0.999, 1e-8};
    std::uint64_t seed = 0;
    ImageLoss loss = ImageLoss::MSE;
    // When false the alignment term is never built; with lambda = 0 both
    // settings must give the same trajectory.
    bool alignment_term = true;

    // 20 for W+, 5 for W.
    static double preset_lambda(Space s);
    // Smallest lambda on the ablation grid that halves the lambda = 0 NSCD of
    // 200-step inversions on the toy generator; reported next to the preset.
    static double toy_lambda(Space s);
    static InversionConfig for_space(Space s);
    void validate() const;
};

struct StepRecord {
    double image_loss = 0.0;
    double nscd = 0.0;
};

struct InversionReport {
    std::vector<StepRecord> trajectory;  // state before each update
    LatentCode code;
    double final_mse = 0.0;
    double final_nscd = 0.0;
    bool aborted = false;
    std::string diagnostic;
};

// Adam on a W or W+ code started at w_init (normally the mean mapped w).
InversionReport invert_optimize(const Tensor& target, const Generator& gen, const MeanCode& mu,
                                const Tensor& w_init, const InversionConfig& cfg);

// Encoder: four conv3x3 + bias + lrelu + avgpool blocks (32 -> 2 pixels), then
// a dense head producing a base w and one delta per layer.
struct EncoderParams {
    std::vector<Tensor> conv_w;  // [out, in, 3, 3]
    std::vector<Tensor> conv_b;  // [out]
    Tensor head_w;               // [w_dim * (1 + k), flat]
    Tensor head_b;
    std::size_t num_layers = 0;
    std::size_t w_dim = 0;

    std::vector<Tensor*> tensors();
    std::vector<const Tensor*> tensors() const;
};

inline constexpr std::size_t kEncoderChannels[4] = {8, 16, 16, 16};

EncoderParams init_encoder(const Generator& gen, const Tensor& w_mean, std::uint64_t seed);

struct EncoderOutput {
    Var base;                 // [w_dim]
    std::vector<Var> deltas;  // k x [w_dim]
    Var wplus;                // [k, w_dim], row l = base + delta_l
};

// Forward pass with the given parameter handles (leaves or constants).
EncoderOutput encoder_forward(const std::vector<Var>& params, std::size_t num_layers, std::size_t w_dim,
                              Var image);

LatentCode invert_encode(const Tensor& target, const EncoderParams& enc);

struct EncoderTrainConfig {
    double lambda = 0.5;
    double lambda_dreg = 2e-5;
    double lr = 1e-3;
    std::size_t batch_size = 8;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    // 0 means a fresh z for every training image.
    std::size_t train_set_size = 0;

    void validate() const;
};

struct EncoderTrainReport {
    EncoderParams encoder;
    std::vector<double> loss, mse, nscd, dreg;  // per iteration, batch means
    bool aborted = false;
    std::string diagnostic;
};

EncoderTrainReport train_encoder(const Generator& gen, const MeanCode& mu, const Tensor& w_mean,
                                 const EncoderTrainConfig& cfg);

// Checkpoint: "LSAE", u32 version, u32 k, u32 w_dim, u32 block count, LSAT blocks.
void write_encoder(std::ostream& out, const EncoderParams& enc);
EncoderParams read_encoder(std::istream& in);
void save_encoder(const std::string& path, const EncoderParams& enc);
EncoderParams load_encoder(const std::string& path);

struct AblationRow {
    double lambda = 0.0;
    double mean_mse = 0.0;
    double mean_nscd = 0.0;
    std::size_t runs = 0;
    std::size_t aborted = 0;
};

// Paired runs: every lambda sees the same targets G(z_i), z_i from target_seed.
std::vector<AblationRow> ablate_lambda(const std::vector<double>& lambdas, std::size_t n_targets,
                                       const InversionConfig& base, const Generator& gen,
                                       const MeanCode& mu, const Tensor& w_init,
                                       std::uint64_t target_seed);
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct TrendCheck {
    bool nscd_non_increasing = true;
    bool mse_non_decreasing = true;
    std::string detail;  // first offending pair, if any
};

// Adjacent rows: nscd[i+1] <= (1 + slack) nscd[i], mse[i+1] >= (1 - slack) mse[i].
TrendCheck check_ablation_trend(const std::vector<AblationRow>& rows, double slack);

}  // namespace lsap
