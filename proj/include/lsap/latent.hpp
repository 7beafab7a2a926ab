#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lsap/generator.hpp"

namespace lsap {

enum class Space { Z, W, Wplus, S, SN };

std::string space_name(Space s);
Space parse_space(const std::string& name);  // throws ConfigError

// A code in one of the latent spaces. Z/W hold one [w_dim] tensor, W+ one
// [k, w_dim] tensor, S/SN one tensor per synthesis layer.
class LatentCode {
public:
    LatentCode() = default;  // empty W code
    static LatentCode z(Tensor v);
    static LatentCode w(Tensor v);
    static LatentCode wplus(Tensor v);
    static LatentCode s(StyleSet v);
    // Checks every layer has unit norm to 1e-12.
    static LatentCode sn(StyleSet v);

    Space space() const { return space_; }
    const std::vector<Tensor>& parts() const { return parts_; }
    // The single tensor of a Z, W or W+ code.
    const Tensor& vec() const;
    // The layer vectors of an S or SN code.
    const StyleSet& styles() const;

    // Shape check against a generator's dimensions.
    void validate(const Generator& gen) const;

    bool operator==(const LatentCode&) const = default;

private:
    LatentCode(Space s, std::vector<Tensor> parts) : space_(s), parts_(std::move(parts)) {}
    Space space_ = Space::W;
    std::vector<Tensor> parts_;
};

// W or W+ -> S. Row l of a W+ code drives layer l.
LatentCode to_style(const Generator& gen, const LatentCode& code);
// S (or SN) -> SN. Throws NumericError on a zero layer vector.
LatentCode normalize_style(const LatentCode& code);
StyleSet normalize_layers(const StyleSet& styles);
// Replicates a W code into W+.
LatentCode broadcast_wplus(const LatentCode& w, std::size_t layers);

// Code files: "LSAC", u32 version, u32 count, then per code u32 space tag,
// u32 part count and LSAT blocks.
void write_codes(std::ostream& out, const std::vector<LatentCode>& codes);
std::vector<LatentCode> read_codes(std::istream& in);
void save_codes(const std::string& path, const std::vector<LatentCode>& codes);
std::vector<LatentCode> load_codes(const std::string& path);

// Unit-norm per-layer mean of normalized synthetic style codes.
struct MeanCode {
    StyleSet mu;
    std::uint64_t k_samples = 0;
    std::uint64_t seed = 0;
    std::string generator_checksum;
};

// Sample i draws its z from stream i of the seed. Partial sums are formed over
// fixed chunks of this size and combined in chunk order, so the estimate does
// not depend on the worker count.
inline constexpr std::size_t kSampleChunk = 1024;

MeanCode estimate_mean_code(const Generator& gen, std::uint64_t k_samples, std::uint64_t seed);
// Mean of given SN codes, renormalized per layer.
StyleSet mean_of_normalized(const std::vector<StyleSet>& sn_codes);
// Mean of mapped w over n samples (the usual optimisation starting point).
Tensor estimate_mean_w(const Generator& gen, std::uint64_t n, std::uint64_t seed);

// The i-th synthetic z under a seed.
Tensor sample_z(const Generator& gen, std::uint64_t seed, std::uint64_t index);

// Mean code file: "LSAM", u32 layer count, LSAT blocks. The JSON sidecar at
// path + ".json" records k_samples, seed and generator_checksum.
void save_mean_code(const std::string& path, const MeanCode& mc);
MeanCode load_mean_code(const std::string& path);

struct Projection {
    std::vector<std::pair<double, double>> points;
    bool degenerate = false;
};

// Top-2 PCA of concatenated layer vectors. Falls back to the first two raw
// coordinates when the covariance has fewer than two usable directions.
Projection project_2d(const std::vector<LatentCode>& sn_codes);
std::string projection_csv(const Projection& p);

}  // namespace lsap
