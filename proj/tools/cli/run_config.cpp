#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lsap/editing.hpp"
#include "lsap/error.hpp"

namespace lsap::cli {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Typed, strict access to one JSON object. Every key read is remembered so
// finish() can reject the rest.
class Section {
public:
    Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    void number(const char* key, double& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
        out = v.get<double>();
    }

    template <class U>
    void count(const char* key, U& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
        out = static_cast<U>(v.get<std::uint64_t>());
    }

    void flag(const char* key, bool& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(path(key) + ": expected true or false");
        out = v.get<bool>();
    }

    void text(const char* key, std::string& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
        out = v.get<std::string>();
    }

    void numbers(const char* key, std::vector<double>& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(path(key) + ": expected an array of numbers");
            out.push_back(e.get<double>());
        }
    }

    void counts(const char* key, std::vector<std::size_t>& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(path(key) + ": expected an array of integers");
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number_unsigned()) throw ConfigError(path(key) + ": expected an array of integers");
            out.push_back(e.get<std::size_t>());
        }
    }

    template <class F>
    void object(const char* key, F&& read) {
        if (!has(key)) return;
        Section s(j_.at(key), path(key));
        read(s);
        s.finish();
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
        }
    }

private:
    std::string path(const char* key) const { return where_ + "." + key; }

    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

Space parse_w_space(const std::string& name) {
    const Space s = parse_space(name);
    if (s != Space::W && s != Space::Wplus) throw ConfigError("inversion.space must be W or Wplus");
    return s;
}

}  // namespace

EncoderTrainConfig RunConfig::default_encoder() {
    EncoderTrainConfig e;
    e.seed = 11;
    return e;
}

void RunConfig::validate() const {
    generator.validate();
    if (mean_code.k_samples == 0 || mean_code.w_mean_samples == 0) {
        throw ConfigError("mean_code sample counts must be >= 1");
    }
    inversion.validate();
    encoder.validate();
    if (ablation.lambdas.empty()) throw ConfigError("ablation.lambdas is empty");
    for (std::size_t i = 0; i < ablation.lambdas.size(); ++i) {
        if (!(ablation.lambdas[i] >= 0.0)) throw ConfigError("ablation.lambdas must be >= 0");
        if (i > 0 && !(ablation.lambdas[i] > ablation.lambdas[i - 1])) {
            throw ConfigError("ablation.lambdas must be strictly ascending");
        }
    }
    if (ablation.n_targets == 0) throw ConfigError("ablation.n_targets must be >= 1");
    if (editing.n_samples < 200) throw ConfigError("editing.n_samples must be >= 200");
    if (!std::isfinite(editing.alpha)) throw ConfigError("editing.alpha must be finite");
    attribute_by_name(editing.attribute);
    if (sample.count == 0) throw ConfigError("sample.count must be >= 1");
}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    Section r(root, "config");
    r.count("seed", c.seed);
    r.object("generator", [&](Section& g) {
        auto& gc = c.generator;
        g.count("k", gc.num_layers);
        g.count("z_dim", gc.z_dim);
        g.count("w_dim", gc.w_dim);
        g.count("mapping_layers", gc.mapping_layers);
        g.count("const_channels", gc.const_channels);
        g.count("const_resolution", gc.const_resolution);
        g.counts("channels", gc.channels);
        g.number("epsilon", gc.epsilon);
        g.number("affine_gain", gc.affine_gain);
        g.number("rgb_gain", gc.rgb_gain);
        g.number("lrelu_slope", gc.lrelu_slope);
    });
    r.object("mean_code", [&](Section& m) {
        m.count("k_samples", c.mean_code.k_samples);
        m.count("seed", c.mean_code.seed);
        m.count("w_mean_samples", c.mean_code.w_mean_samples);
        m.count("w_mean_seed", c.mean_code.w_mean_seed);
    });
    r.object("inversion", [&](Section& s) {
        auto& ic = c.inversion;
        std::string space = space_name(ic.space), loss = image_loss_name(ic.loss);
        s.text("space", space);
        ic.space = parse_w_space(space);
        s.number("lambda", ic.lambda);
        s.count("steps", ic.steps);
        s.number("lr", ic.adam.lr);
        s.number("beta1", ic.adam.beta1);
        s.number("beta2", ic.adam.beta2);
        s.number("adam_eps", ic.adam.eps);
        s.count("seed", ic.seed);
        s.text("loss", loss);
        ic.loss = parse_image_loss(loss);
        s.flag("alignment_term", ic.alignment_term);
    });
    r.object("encoder", [&](Section& s) {
        auto& e = c.encoder;
        s.number("lambda", e.lambda);
        s.number("lambda_dreg", e.lambda_dreg);
        s.number("lr", e.lr);
        s.count("batch_size", e.batch_size);
        s.count("iterations", e.iterations);
        s.count("seed", e.seed);
        s.count("train_set_size", e.train_set_size);
    });
    r.object("ablation", [&](Section& s) {
        s.numbers("lambdas", c.ablation.lambdas);
        s.count("n_targets", c.ablation.n_targets);
        s.count("target_seed", c.ablation.target_seed);
    });
    r.object("editing", [&](Section& s) {
        s.text("attribute", c.editing.attribute);
        s.count("n_samples", c.editing.n_samples);
        s.count("seed", c.editing.seed);
        s.number("alpha", c.editing.alpha);
    });
    r.object("sample", [&](Section& s) {
        std::string space = space_name(c.sample.space);
        s.count("count", c.sample.count);
        s.count("seed", c.sample.seed);
        s.text("space", space);
        c.sample.space = parse_space(space);
    });
    r.object("properties", [&](Section& s) { s.count("seed", c.properties_seed); });
    r.finish();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& c) {
    ojson j;
    j["seed"] = c.seed;
    const auto& g = c.generator;
    j["generator"] = {{"k", g.num_layers},
                      {"z_dim", g.z_dim},
                      {"w_dim", g.w_dim},
                      {"mapping_layers", g.mapping_layers},
                      {"const_channels", g.const_channels},
                      {"const_resolution", g.const_resolution},
                      {"channels", g.channels},
                      {"epsilon", g.epsilon},
                      {"affine_gain", g.affine_gain},
                      {"rgb_gain", g.rgb_gain},
                      {"lrelu_slope", g.lrelu_slope}};
    j["mean_code"] = {{"k_samples", c.mean_code.k_samples},
                      {"seed", c.mean_code.seed},
                      {"w_mean_samples", c.mean_code.w_mean_samples},
                      {"w_mean_seed", c.mean_code.w_mean_seed}};
    const auto& i = c.inversion;
    j["inversion"] = {{"space", space_name(i.space)},
                      {"lambda", i.lambda},
                      {"steps", i.steps},
                      {"lr", i.adam.lr},
                      {"beta1", i.adam.beta1},
                      {"beta2", i.adam.beta2},
                      {"adam_eps", i.adam.eps},
                      {"seed", i.seed},
                      {"loss", image_loss_name(i.loss)},
                      {"alignment_term", i.alignment_term}};
    const auto& e = c.encoder;
    j["encoder"] = {{"lambda", e.lambda},
                    {"lambda_dreg", e.lambda_dreg},
                    {"lr", e.lr},
                    {"batch_size", e.batch_size},
                    {"iterations", e.iterations},
                    {"seed", e.seed},
                    {"train_set_size", e.train_set_size}};
    j["ablation"] = {{"lambdas", c.ablation.lambdas},
                     {"n_targets", c.ablation.n_targets},
                     {"target_seed", c.ablation.target_seed}};
    j["editing"] = {{"attribute", c.editing.attribute},
                    {"n_samples", c.editing.n_samples},
                    {"seed", c.editing.seed},
                    {"alpha", c.editing.alpha}};
    j["sample"] = {{"count", c.sample.count}, {"seed", c.sample.seed}, {"space", space_name(c.sample.space)}};
    j["properties"] = {{"seed", c.properties_seed}};
    return j.dump(2) + "\n";
}

}  // namespace lsap::cli
