#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsap/generator.hpp"
#include "lsap/inversion.hpp"

namespace lsap::cli {

struct MeanCodeSettings {
    std::uint64_t k_samples = 50000;
    std::uint64_t seed = 1;
    // Mean mapped w, the starting point of optimisation-based inversion.
    std::uint64_t w_mean_samples = 10000;
    std::uint64_t w_mean_seed = 2;
};

struct AblationSettings {
    std::vector<double> lambdas = {0.0, 0.1, 0.25, 0.5, 0.75, 1.0};
    std::size_t n_targets = 20;
    std::uint64_t target_seed = 777;
};

struct EditingSettings {
    std::string attribute = "brightness";
    std::size_t n_samples = 2000;
    std::uint64_t seed = 3;
    double alpha = 2.0;
};

struct SampleSettings {
    std::size_t count = 16;
    std::uint64_t seed = 100;
    Space space = Space::W;
};

// Every knob of every subcommand. Unknown keys are rejected when parsing.
struct RunConfig {
    std::uint64_t seed = 7;  // generator initialisation
    GeneratorConfig generator;
    MeanCodeSettings mean_code;
    InversionConfig inversion;
    EncoderTrainConfig encoder = default_encoder();
    AblationSettings ablation;
    EditingSettings editing;
    SampleSettings sample;
    std::uint64_t properties_seed = 4;

    void validate() const;

    static EncoderTrainConfig default_encoder();
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
// Canonical JSON with every field; parse_run_config(dump) reproduces it.
std::string dump_run_config(const RunConfig& cfg);

}  // namespace lsap::cli
