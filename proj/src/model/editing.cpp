#include "lsap/editing.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lsap/error.hpp"
#include "lsap/parallel.hpp"

namespace lsap {

ToyAttribute brightness() {
    return {"brightness", [](const Tensor& img) {
                if (img.numel() == 0) throw ShapeError("brightness of an empty image");
                return compensated_sum(img.data()) / static_cast<double>(img.numel());
            }};
}

ToyAttribute asymmetry() {
    return {"asymmetry", [](const Tensor& img) {
                if (img.rank() != 3) throw ShapeError("asymmetry needs a CxHxW image");
                const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
                double total = 0.0;
                for (std::size_t ch = 0; ch < c; ++ch)
                    for (std::size_t y = 0; y < h; ++y)
                        for (std::size_t x = 0; x < w / 2; ++x) {
                            const std::size_t row = (ch * h + y) * w;
                            total += std::abs(img[row + x] - img[row + w - 1 - x]);
                        }
                return total / static_cast<double>(c * h * (w / 2));
            }};
}

ToyAttribute negated(const ToyAttribute& a) {
    return {"-" + a.name, [f = a.fn](const Tensor& img) { return -f(img); }};
}

ToyAttribute attribute_by_name(const std::string& name) {
    if (!name.empty() && name[0] == '-') return negated(attribute_by_name(name.substr(1)));
    if (name == "brightness") return brightness();
    if (name == "asymmetry") return asymmetry();
    throw ConfigError("unknown attribute '" + name + "'");
}

Tensor generate(const Generator& gen, const LatentCode& code) {
    switch (code.space()) {
        case Space::W: return gen.generate_from_w(code.vec());
        case Space::Wplus: return gen.generate_from_wplus(code.vec());
        case Space::Z: return gen.generate_from_z(code.vec());
        case Space::S:
        case Space::SN: return gen.synthesize(code.styles());
    }
    throw ConfigError("generate: bad code");
}

namespace {

struct Sample {
    Tensor w;
    double attr;
    std::size_t index;
};

// Indices of the bottom and top quartile by attribute (ties broken by index).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> quartiles(const std::vector<Sample>& s,
                                                                        std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> idx(hi - lo);
    std::iota(idx.begin(), idx.end(), lo);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return s[a].attr != s[b].attr ? s[a].attr < s[b].attr : a < b;
    });
    const std::size_t q = idx.size() / 4;
    return {std::vector<std::size_t>(idx.begin(), idx.begin() + q), std::vector<std::size_t>(idx.end() - q, idx.end())};
}

Tensor mean_w(const std::vector<Sample>& s, const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> sorted = idx;
    std::sort(sorted.begin(), sorted.end());  // fixed summation order
    Tensor m(s[sorted.front()].w.shape(), 0.0);
    for (auto i : sorted)
        for (std::size_t j = 0; j < m.numel(); ++j) m[j] += s[i].w[j];
    for (auto& v : m.data()) v /= static_cast<double>(sorted.size());
    return m;
}

}  // namespace

EditDirection find_direction(const Generator& gen, const ToyAttribute& attr, std::size_t n_samples,
                             std::uint64_t seed) {
    if (n_samples < 200) throw ConfigError("find_direction needs at least 200 samples");
    std::vector<Sample> samples(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        Tensor w = gen.mapping(sample_z(gen, seed, i));
        const double a = attr(gen.generate_from_w(w));
        if (!std::isfinite(a)) throw NumericError("attribute " + attr.name + " is not finite");
        samples[i] = {std::move(w), a, i};
    });
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end(),
                                              [](const Sample& a, const Sample& b) { return a.attr < b.attr; });
    if (mx->attr - mn->attr <= 1e-12 * std::max(1.0, std::abs(mx->attr))) {
        throw NumericError("attribute " + attr.name + " is constant across samples");
    }

    const std::size_t half = n_samples / 2;
    auto [bottom, top] = quartiles(samples, 0, half);
    Tensor hi = mean_w(samples, top), lo = mean_w(samples, bottom);
    Tensor d(hi.shape());
    for (std::size_t j = 0; j < d.numel(); ++j) d[j] = hi[j] - lo[j];
    const double n = l2_norm(d.data());
    if (n == 0.0) throw NumericError("attribute " + attr.name + " gives a zero direction");
    for (auto& v : d.data()) v /= n;

    // Held-out check: the hyperplane through the class midpoint, normal d.
    double offset = 0.0;
    for (std::size_t j = 0; j < d.numel(); ++j) offset += d[j] * 0.5 * (hi[j] + lo[j]);
    auto [hb, ht] = quartiles(samples, half, n_samples);
    std::size_t correct = 0;
    for (auto i : ht) correct += dot(samples[i].w.data(), d.data()) > offset ? 1 : 0;
    for (auto i : hb) correct += dot(samples[i].w.data(), d.data()) <= offset ? 1 : 0;

    EditDirection out;
    out.d = std::move(d);
    out.attribute = attr.name;
    out.fit_quality = static_cast<double>(correct) / static_cast<double>(ht.size() + hb.size());
    return out;
}

LatentCode edit(const LatentCode& code, const EditDirection& d, double alpha) {
    const auto& v = code.vec();
    const std::size_t dim = d.d.numel();
    if (code.space() != Space::W && code.space() != Space::Wplus) {
        throw ConfigError("edit needs a W or W+ code, got " + space_name(code.space()));
    }
    if (v.numel() % dim != 0 || v.shape().back() != dim) throw ShapeError("edit: direction does not match code");
    Tensor out = v;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += alpha * d.d[i % dim];
    return code.space() == Space::W ? LatentCode::w(std::move(out)) : LatentCode::wplus(std::move(out));
}

std::string direction_json(const EditDirection& d) {
    nlohmann::ordered_json j;
    j["attribute"] = d.attribute;
    j["fit_quality"] = d.fit_quality;
    j["direction"] = d.d.values();
    return j.dump(2) + "\n";
}

EditDirection parse_direction_json(const std::string& text) {
    try {
        auto j = nlohmann::json::parse(text);
        EditDirection d;
        d.attribute = j.at("attribute").get<std::string>();
        d.fit_quality = j.at("fit_quality").get<double>();
        d.d = Tensor::vector(j.at("direction").get<std::vector<double>>());
        if (d.d.numel() == 0) throw ConfigError("direction: empty vector");
        if (std::abs(l2_norm(d.d.data()) - 1.0) > 1e-9) throw ConfigError("direction is not unit norm");
        if (!(d.fit_quality >= 0.0 && d.fit_quality <= 1.0)) throw ConfigError("fit_quality outside [0, 1]");
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("direction file: ") + e.what());
    }
}

void save_direction(const std::string& path, const EditDirection& d) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << direction_json(d);
}

EditDirection load_direction(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open direction file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_direction_json(ss.str());
}

LecReport lec(const Generator& gen, const Embedder& embed, const EditDirection& d, double alpha,
              const std::vector<Tensor>& targets) {
    LecReport r;
    r.rows.resize(targets.size());
    parallel_for(targets.size(), [&](std::size_t i) {
        auto& row = r.rows[i];
        try {
            const LatentCode c = embed(targets[i]);
            const LatentCode edited = edit(c, d, alpha);
            const LatentCode again = embed(generate(gen, edited));
            const auto& a = again.vec();
            const auto& b = edited.vec();
            if (a.shape() != b.shape()) throw ShapeError("re-embedded code changed shape");
            double s = 0.0;
            for (std::size_t j = 0; j < a.numel(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
            const Tensor back = generate(gen, edit(again, d, -alpha));
            double m = 0.0;
            for (std::size_t j = 0; j < back.numel(); ++j) m += (back[j] - targets[i][j]) * (back[j] - targets[i][j]);
            row.lec = s;
            row.revert_mse = m / static_cast<double>(back.numel());
            if (!std::isfinite(row.lec) || !std::isfinite(row.revert_mse)) throw NumericError("non-finite LEC");
        } catch (const Error& e) {
            row.flagged = true;
            row.note = e.what();
        }
    });
    std::size_t ok = 0;
    for (const auto& row : r.rows) {
        if (row.flagged) {
            ++r.flagged;
            continue;
        }
        r.mean_lec += row.lec;
        r.mean_revert_mse += row.revert_mse;
        ++ok;
    }
    if (ok > 0) {
        r.mean_lec /= static_cast<double>(ok);
        r.mean_revert_mse /= static_cast<double>(ok);
    } else {
        r.mean_lec = r.mean_revert_mse = std::nan("");
    }
    return r;
}

std::string lec_csv(const LecReport& r) {
    std::string out = "target_id,lec,revert_mse,flagged\n";
    char buf[128];
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        std::snprintf(buf, sizeof buf, "%zu,%.10e,%.10e,%d\n", i, row.lec, row.revert_mse, row.flagged ? 1 : 0);
        out += buf;
    }
    return out;
}

}  // namespace lsap
