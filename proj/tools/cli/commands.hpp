#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "run_config.hpp"

namespace lsap::cli {

// Artifact locations. Unset paths resolve to the standard file name inside
// `in` (which defaults to the output directory).
struct Paths {
    std::string out = ".";
    std::string in;
    std::string generator, mean_code, w_mean, encoder, direction;

    std::string resolve(const std::string& explicit_path, const char* standard_name) const;
};

// Where target images come from: a tensor file ([3,H,W] or [N,3,H,W]) or,
// without a file, G(z_i) for i in [first, first + count) under a seed.
struct TargetSource {
    std::string file;
    std::optional<std::size_t> index;  // pick one image of a stacked file
    std::uint64_t seed = 4242;
    std::size_t first = 0;
    std::size_t count = 1;
};

void cmd_print_config(const RunConfig& cfg);
void cmd_init_gen(const RunConfig& cfg, const Paths& p);
void cmd_mean_code(const RunConfig& cfg, const Paths& p);
void cmd_sample(const RunConfig& cfg, const Paths& p);
void cmd_invert(const RunConfig& cfg, const Paths& p, const TargetSource& t);
void cmd_train_encoder(const RunConfig& cfg, const Paths& p);
void cmd_encode(const RunConfig& cfg, const Paths& p, const TargetSource& t);
void cmd_nscd(const RunConfig& cfg, const Paths& p, const std::string& codes, bool self);
void cmd_direction(const RunConfig& cfg, const Paths& p);
void cmd_edit(const RunConfig& cfg, const Paths& p, const std::string& codes, std::size_t index);
void cmd_lec(const RunConfig& cfg, const Paths& p, const TargetSource& t);
void cmd_ablate(const RunConfig& cfg, const Paths& p);
void cmd_props(const RunConfig& cfg, const Paths& p);
void cmd_project(const RunConfig& cfg, const Paths& p, const std::string& codes);

}  // namespace lsap::cli
