#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lsap/latent.hpp"

namespace lsap {

// A scalar image functional used as a stand-in semantic label.
struct ToyAttribute {
    std::string name;
    std::function<double(const Tensor&)> fn;

    double operator()(const Tensor& image) const { return fn(image); }
};

// Mean over all pixels and channels.
ToyAttribute brightness();
// Mean |left half - mirrored right half|.
ToyAttribute asymmetry();
ToyAttribute negated(const ToyAttribute& a);
// "brightness", "asymmetry", optionally prefixed with '-'.
ToyAttribute attribute_by_name(const std::string& name);

struct EditDirection {
    Tensor d;  // unit vector in W
    std::string attribute;
    double fit_quality = 0.0;  // held-out accuracy in [0, 1]
};

// Mean difference between the top and bottom attribute quartiles of the
// first half of n_samples mapped w's. Fit quality is the accuracy of the
// induced linear rule on the top/bottom quartiles of the other half.
EditDirection find_direction(const Generator& gen, const ToyAttribute& attr, std::size_t n_samples,
                             std::uint64_t seed);

// w + alpha d; for W+ every row moves.
LatentCode edit(const LatentCode& code, const EditDirection& d, double alpha);

std::string direction_json(const EditDirection& d);
EditDirection parse_direction_json(const std::string& text);
void save_direction(const std::string& path, const EditDirection& d);
EditDirection load_direction(const std::string& path);

using Embedder = std::function<LatentCode(const Tensor& image)>;

struct LecRow {
    double lec = 0.0;
    // MSE between the target and the image of the re-embedded edit moved back
    // by -alpha; a pixel-space view of edit consistency.
    double revert_mse = 0.0;
    bool flagged = false;
    std::string note;
};

struct LecReport {
    std::vector<LecRow> rows;
    double mean_lec = 0.0;         // over unflagged rows
    double mean_revert_mse = 0.0;  // over unflagged rows
    std::size_t flagged = 0;
};

// Per target: c = embed(x), c' = edit(c, d, alpha), LEC = ||embed(G(c')) - c'||^2.
LecReport lec(const Generator& gen, const Embedder& embed, const EditDirection& d, double alpha,
              const std::vector<Tensor>& targets);
std::string lec_csv(const LecReport& r);

// Image of a W or W+ code.
Tensor generate(const Generator& gen, const LatentCode& code);

}  // namespace lsap
