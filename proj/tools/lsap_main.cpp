#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>

#include "cli/commands.hpp"
#include "cli/outputs.hpp"
#include "lsap/error.hpp"

using namespace lsap;
using namespace lsap::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Overrides {
    std::optional<std::string> space;
    std::optional<double> lambda;
    std::optional<std::size_t> steps;
    bool no_alignment = false;
    std::optional<double> alpha;
    std::optional<std::size_t> count;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> iterations;
    std::optional<std::uint64_t> k_samples;
    std::optional<std::size_t> n_targets;
};

struct Invocation {
    std::string config_path;
    Paths paths;
    TargetSource targets;
    std::optional<std::size_t> index;
    std::optional<std::size_t> target_count;
    std::string codes;
    bool self = false;
    Overrides o;
    std::string command;
};

RunConfig effective_config(const Invocation& inv) {
    RunConfig cfg = inv.config_path.empty() ? RunConfig{} : load_run_config(inv.config_path);
    const auto& o = inv.o;
    const std::string& c = inv.command;
    if (c == "invert" || c == "ablate") {
        if (o.space) {
            cfg.inversion.space = parse_space(*o.space);
            if (!o.lambda) cfg.inversion.lambda = InversionConfig::preset_lambda(cfg.inversion.space);
        }
        if (o.lambda) cfg.inversion.lambda = *o.lambda;
        if (o.steps) cfg.inversion.steps = *o.steps;
        if (o.no_alignment) cfg.inversion.alignment_term = false;
        if (o.n_targets) cfg.ablation.n_targets = *o.n_targets;
    }
    if (c == "train-encoder") {
        if (o.lambda) cfg.encoder.lambda = *o.lambda;
        if (o.iterations) cfg.encoder.iterations = *o.iterations;
        if (o.seed) cfg.encoder.seed = *o.seed;
    }
    if (c == "sample") {
        if (o.count) cfg.sample.count = *o.count;
        if (o.seed) cfg.sample.seed = *o.seed;
        if (o.space) cfg.sample.space = parse_space(*o.space);
    }
    if (c == "mean-code" && o.k_samples) cfg.mean_code.k_samples = *o.k_samples;
    if (c == "init-gen" && o.seed) cfg.seed = *o.seed;
    if (c == "props" && o.seed) cfg.properties_seed = *o.seed;
    if ((c == "edit" || c == "lec") && o.alpha) cfg.editing.alpha = *o.alpha;
    cfg.validate();
    return cfg;
}

void diagnostic(const Invocation& inv, const char* kind, const std::string& message) {
    nlohmann::ordered_json j;
    j["status"] = kind;
    j["command"] = inv.command;
    j["message"] = message;
    const std::string text = j.dump(2) + "\n";
    std::cerr << text;
    if (std::string(kind) == "numeric_failure" && std::filesystem::is_directory(inv.paths.out)) {
        try {
            write_file_atomic(inv.paths.out + "/diagnostic.json", text);
        } catch (const Error&) {
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lsap: latent space alignment toolkit on a toy style-based generator"};
    app.require_subcommand(1);
    Invocation inv;

    auto common = [&](CLI::App* s, bool outputs = true) {
        s->add_option("--config", inv.config_path, "run configuration JSON (defaults if omitted)")
            ->check(CLI::ExistingFile);
        if (!outputs) return;
        s->add_option("--out", inv.paths.out, "output directory")->capture_default_str();
        s->add_option("--in", inv.paths.in, "directory holding input artifacts (default: --out)");
        s->add_option("--generator", inv.paths.generator, "generator checkpoint");
        s->add_option("--mean-code", inv.paths.mean_code, "mean code file");
        s->add_option("--w-mean", inv.paths.w_mean, "mean w tensor");
        s->add_option("--encoder", inv.paths.encoder, "encoder checkpoint");
        s->add_option("--direction", inv.paths.direction, "edit direction JSON");
    };
    auto targets = [&](CLI::App* s, const char* count_help) {
        s->add_option("--target", inv.targets.file, "image tensor file, [3,H,W] or [N,3,H,W]");
        s->add_option("--index", inv.index, "image index inside a stacked target file");
        s->add_option("--target-seed", inv.targets.seed, "seed of generated targets when no file is given");
        s->add_option("--target-first", inv.targets.first, "first generated target index");
        s->add_option("--target-count", inv.target_count, count_help);
    };

    std::map<std::string, std::function<void(const RunConfig&)>> run;
    auto sub = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->callback([&inv, name] { inv.command = name; });
        return s;
    };

    auto* print = sub("print-config", "print the effective configuration as JSON");
    common(print, false);
    run["print-config"] = [&](const RunConfig& c) { cmd_print_config(c); };

    auto* init = sub("init-gen", "initialise a random toy generator");
    common(init);
    init->add_option("--seed", inv.o.seed, "generator seed");
    run["init-gen"] = [&](const RunConfig& c) { cmd_init_gen(c, inv.paths); };

    auto* mean = sub("mean-code", "estimate the synthetic mean code and the mean w");
    common(mean);
    mean->add_option("--k", inv.o.k_samples, "number of samples");
    run["mean-code"] = [&](const RunConfig& c) { cmd_mean_code(c, inv.paths); };

    auto* sample = sub("sample", "sample codes and images");
    common(sample);
    sample->add_option("--count", inv.o.count);
    sample->add_option("--seed", inv.o.seed);
    sample->add_option("--space", inv.o.space, "Z, W, Wplus, S or SN");
    run["sample"] = [&](const RunConfig& c) { cmd_sample(c, inv.paths); };

    auto* invert = sub("invert", "optimisation-based inversion of one image");
    common(invert);
    targets(invert, "number of generated targets (1)");
    invert->add_option("--space", inv.o.space, "W or Wplus");
    invert->add_option("--lambda", inv.o.lambda, "alignment weight");
    invert->add_option("--steps", inv.o.steps);
    invert->add_flag("--no-alignment", inv.o.no_alignment, "do not build the alignment term at all");
    run["invert"] = [&](const RunConfig& c) { cmd_invert(c, inv.paths, inv.targets); };

    auto* train = sub("train-encoder", "train the W+ encoder");
    common(train);
    train->add_option("--lambda", inv.o.lambda, "alignment weight");
    train->add_option("--iterations", inv.o.iterations);
    train->add_option("--seed", inv.o.seed);
    run["train-encoder"] = [&](const RunConfig& c) { cmd_train_encoder(c, inv.paths); };

    auto* encode = sub("encode", "embed images with a trained encoder");
    common(encode);
    targets(encode, "number of generated targets (1)");
    run["encode"] = [&](const RunConfig& c) { cmd_encode(c, inv.paths, inv.targets); };

    auto* nscd = sub("nscd", "alignment score of a code file against the mean code");
    common(nscd);
    nscd->add_option("--codes", inv.codes, "code file");
    nscd->add_flag("--self", inv.self, "score the mean code itself");
    run["nscd"] = [&](const RunConfig& c) { cmd_nscd(c, inv.paths, inv.codes, inv.self); };

    auto* direction = sub("direction", "fit an edit direction for a toy attribute");
    common(direction);
    run["direction"] = [&](const RunConfig& c) { cmd_direction(c, inv.paths); };

    auto* edit = sub("edit", "apply an edit direction to a W or W+ code");
    common(edit);
    edit->add_option("--codes", inv.codes, "code file")->required();
    edit->add_option("--index", inv.index, "code index");
    edit->add_option("--alpha", inv.o.alpha);
    run["edit"] = [&](const RunConfig& c) { cmd_edit(c, inv.paths, inv.codes, inv.index.value_or(0)); };

    auto* lec = sub("lec", "latent editing consistency of the encoder");
    common(lec);
    targets(lec, "number of generated targets (50)");
    lec->add_option("--alpha", inv.o.alpha);
    run["lec"] = [&](const RunConfig& c) { cmd_lec(c, inv.paths, inv.targets); };

    auto* ablate = sub("ablate", "lambda ablation over paired targets (table5_trend.csv)");
    common(ablate);
    ablate->add_option("--space", inv.o.space, "W or Wplus");
    ablate->add_option("--steps", inv.o.steps);
    ablate->add_option("--targets", inv.o.n_targets);
    run["ablate"] = [&](const RunConfig& c) { cmd_ablate(c, inv.paths); };

    auto* props = sub("props", "run the structural property suite (properties_report.json)");
    common(props);
    props->add_option("--seed", inv.o.seed);
    run["props"] = [&](const RunConfig& c) { cmd_props(c, inv.paths); };

    auto* project = sub("project", "2-D PCA of normalized style codes (projection.csv)");
    common(project);
    project->add_option("--codes", inv.codes, "code file")->required();
    run["project"] = [&](const RunConfig& c) { cmd_project(c, inv.paths, inv.codes); };

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        inv.targets.index = inv.index;
        inv.targets.count = inv.target_count.value_or(inv.command == "lec" ? 50 : 1);
        const RunConfig cfg = effective_config(inv);
        run.at(inv.command)(cfg);
        return 0;
    } catch (const NumericError& e) {
        diagnostic(inv, "numeric_failure", e.what());
        return kExitNumeric;
    } catch (const Error& e) {
        diagnostic(inv, "config_error", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        diagnostic(inv, "config_error", e.what());
        return kExitConfig;
    }
}
