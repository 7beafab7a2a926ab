#include "lsap/latent.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lsap/error.hpp"
#include "lsap/parallel.hpp"
#include "lsap/rng.hpp"

namespace lsap {

std::string space_name(Space s) {
    switch (s) {
        case Space::Z: return "Z";
        case Space::W: return "W";
        case Space::Wplus: return "Wplus";
        case Space::S: return "S";
        case Space::SN: return "SN";
    }
    return "?";
}

Space parse_space(const std::string& name) {
    std::string lower = name;
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    for (Space s : {Space::Z, Space::W, Space::Wplus, Space::S, Space::SN}) {
        std::string n = space_name(s);
        for (auto& ch : n) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (n == lower) return s;
    }
    if (lower == "w+") return Space::Wplus;
    throw ConfigError("unknown latent space '" + name + "'");
}

LatentCode LatentCode::z(Tensor v) {
    if (v.rank() != 1) throw ShapeError("Z code must be a vector");
    return LatentCode(Space::Z, {std::move(v)});
}

LatentCode LatentCode::w(Tensor v) {
    if (v.rank() != 1) throw ShapeError("W code must be a vector");
    return LatentCode(Space::W, {std::move(v)});
}

LatentCode LatentCode::wplus(Tensor v) {
    if (v.rank() != 2) throw ShapeError("W+ code must be a [k, w_dim] matrix");
    return LatentCode(Space::Wplus, {std::move(v)});
}

LatentCode LatentCode::s(StyleSet v) {
    if (v.empty()) throw ShapeError("S code needs at least one layer");
    for (const auto& t : v)
        if (t.rank() != 1) throw ShapeError("S code layers must be vectors");
    return LatentCode(Space::S, std::move(v));
}

LatentCode LatentCode::sn(StyleSet v) {
    auto code = s(std::move(v));
    for (std::size_t l = 0; l < code.parts_.size(); ++l) {
        const double n = l2_norm(code.parts_[l].data());
        if (std::abs(n - 1.0) > 1e-12) {
            throw NumericError("SN code layer " + std::to_string(l) + " has norm " + std::to_string(n));
        }
    }
    code.space_ = Space::SN;
    return code;
}

const Tensor& LatentCode::vec() const {
    if (space_ == Space::S || space_ == Space::SN) {
        throw ConfigError("expected a Z, W or W+ code, got " + space_name(space_));
    }
    return parts_.front();
}

const StyleSet& LatentCode::styles() const {
    if (space_ != Space::S && space_ != Space::SN) {
        throw ConfigError("expected an S or SN code, got " + space_name(space_));
    }
    return parts_;
}

void LatentCode::validate(const Generator& gen) const {
    const auto& c = gen.config();
    switch (space_) {
        case Space::Z:
            if (vec().shape() != Shape{c.z_dim}) throw ShapeError("Z code has wrong length");
            break;
        case Space::W:
            if (vec().shape() != Shape{c.w_dim}) throw ShapeError("W code has wrong length");
            break;
        case Space::Wplus:
            if (vec().shape() != Shape{c.num_layers, c.w_dim}) throw ShapeError("W+ code has wrong shape");
            break;
        case Space::S:
        case Space::SN:
            gen.validate_styles(parts_);
            break;
    }
}

LatentCode to_style(const Generator& gen, const LatentCode& code) {
    switch (code.space()) {
        case Space::W: return LatentCode::s(gen.styles_from_w(code.vec()));
        case Space::Wplus: return LatentCode::s(gen.styles_from_wplus(code.vec()));
        default: throw ConfigError("to_style needs a W or W+ code, got " + space_name(code.space()));
    }
}

StyleSet normalize_layers(const StyleSet& styles) {
    StyleSet out;
    out.reserve(styles.size());
    for (std::size_t l = 0; l < styles.size(); ++l) {
        const double n = l2_norm(styles[l].data());
        if (n == 0.0) throw NumericError("normalize_style: layer " + std::to_string(l) + " is zero");
        Tensor t = styles[l];
        for (auto& v : t.data()) v /= n;
        out.push_back(std::move(t));
    }
    return out;
}

LatentCode normalize_style(const LatentCode& code) {
    if (code.space() != Space::S && code.space() != Space::SN) {
        throw ConfigError("normalize_style needs an S code, got " + space_name(code.space()));
    }
    auto sn = normalize_layers(code.styles());
    return LatentCode::sn(std::move(sn));
}

LatentCode broadcast_wplus(const LatentCode& w, std::size_t layers) {
    if (w.space() != Space::W) throw ConfigError("broadcast_wplus needs a W code");
    const auto& v = w.vec();
    Tensor out({layers, v.numel()});
    for (std::size_t l = 0; l < layers; ++l)
        for (std::size_t i = 0; i < v.numel(); ++i) out[l * v.numel() + i] = v[i];
    return LatentCode::wplus(std::move(out));
}

namespace {
constexpr std::uint32_t kCodesVersion = 1;
}

void write_codes(std::ostream& out, const std::vector<LatentCode>& codes) {
    binio::write_magic(out, "LSAC");
    binio::write_u32(out, kCodesVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(codes.size()));
    for (const auto& c : codes) {
        binio::write_u32(out, static_cast<std::uint32_t>(c.space()));
        binio::write_u32(out, static_cast<std::uint32_t>(c.parts().size()));
        for (const auto& t : c.parts()) write_tensor(out, t);
    }
}

std::vector<LatentCode> read_codes(std::istream& in) {
    binio::expect_magic(in, "LSAC");
    if (binio::read_u32(in) != kCodesVersion) throw ConfigError("unsupported code file version");
    const auto n = binio::read_u32(in);
    std::vector<LatentCode> out;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto tag = binio::read_u32(in);
        const auto parts = binio::read_u32(in);
        if (tag > static_cast<std::uint32_t>(Space::SN)) throw ConfigError("code file: bad space tag");
        if (parts == 0 || parts > 4096) throw ConfigError("code file: bad part count");
        std::vector<Tensor> ts;
        for (std::uint32_t p = 0; p < parts; ++p) ts.push_back(read_tensor(in));
        const auto space = static_cast<Space>(tag);
        if (space != Space::S && space != Space::SN && parts != 1) {
            throw ConfigError("code file: vector code with several parts");
        }
        switch (space) {
            case Space::Z: out.push_back(LatentCode::z(std::move(ts[0]))); break;
            case Space::W: out.push_back(LatentCode::w(std::move(ts[0]))); break;
            case Space::Wplus: out.push_back(LatentCode::wplus(std::move(ts[0]))); break;
            case Space::S: out.push_back(LatentCode::s(std::move(ts))); break;
            case Space::SN: out.push_back(LatentCode::sn(std::move(ts))); break;
        }
    }
    return out;
}

void save_codes(const std::string& path, const std::vector<LatentCode>& codes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    write_codes(out, codes);
}

std::vector<LatentCode> load_codes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open code file " + path);
    return read_codes(in);
}

Tensor sample_z(const Generator& gen, std::uint64_t seed, std::uint64_t index) {
    Rng rng(seed, index);
    return sample_standard_normal(rng, {gen.config().z_dim});
}

namespace {

// Sums f(i) over [0, n) into a vector of length dim: per-chunk partials in
// parallel, then combined in chunk order.
template <class F>
std::vector<double> chunked_sum(std::uint64_t n, std::size_t dim, F&& f) {
    const std::size_t chunks = static_cast<std::size_t>((n + kSampleChunk - 1) / kSampleChunk);
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(dim, 0.0));
    parallel_for(chunks, [&](std::size_t c) {
        const std::uint64_t lo = c * kSampleChunk;
        const std::uint64_t hi = std::min<std::uint64_t>(n, lo + kSampleChunk);
        auto& acc = partial[c];
        for (std::uint64_t i = lo; i < hi; ++i) f(i, acc);
    });
    std::vector<double> total(dim, 0.0);
    for (const auto& p : partial)
        for (std::size_t j = 0; j < dim; ++j) total[j] += p[j];
    return total;
}

}  // namespace

MeanCode estimate_mean_code(const Generator& gen, std::uint64_t k_samples, std::uint64_t seed) {
    if (k_samples == 0) throw ConfigError("estimate_mean_code: k_samples must be >= 1");
    const auto dims = gen.style_dims();
    std::size_t total_dim = 0;
    for (auto d : dims) total_dim += d;
    auto sum = chunked_sum(k_samples, total_dim, [&](std::uint64_t i, std::vector<double>& acc) {
        auto sn = normalize_layers(gen.styles_from_w(gen.mapping(sample_z(gen, seed, i))));
        std::size_t off = 0;
        for (const auto& layer : sn) {
            for (double v : layer.data()) acc[off++] += v;
        }
    });
    StyleSet mean;
    std::size_t off = 0;
    for (auto d : dims) {
        Tensor t({d});
        for (std::size_t j = 0; j < d; ++j) t[j] = sum[off + j];
        off += d;
        mean.push_back(std::move(t));
    }
    MeanCode mc;
    mc.mu = normalize_layers(mean);
    mc.k_samples = k_samples;
    mc.seed = seed;
    mc.generator_checksum = generator_checksum(gen);
    return mc;
}

StyleSet mean_of_normalized(const std::vector<StyleSet>& sn_codes) {
    if (sn_codes.empty()) throw ConfigError("mean_of_normalized: no codes");
    StyleSet sum = sn_codes.front();
    for (std::size_t i = 1; i < sn_codes.size(); ++i) {
        if (sn_codes[i].size() != sum.size()) throw ShapeError("mean_of_normalized: layer count mismatch");
        for (std::size_t l = 0; l < sum.size(); ++l) {
            if (sn_codes[i][l].shape() != sum[l].shape()) throw ShapeError("mean_of_normalized: layer shape");
            for (std::size_t j = 0; j < sum[l].numel(); ++j) sum[l][j] += sn_codes[i][l][j];
        }
    }
    return normalize_layers(sum);
}

Tensor estimate_mean_w(const Generator& gen, std::uint64_t n, std::uint64_t seed) {
    if (n == 0) throw ConfigError("estimate_mean_w: n must be >= 1");
    const std::size_t dim = gen.config().w_dim;
    auto sum = chunked_sum(n, dim, [&](std::uint64_t i, std::vector<double>& acc) {
        auto w = gen.mapping(sample_z(gen, seed, i));
        for (std::size_t j = 0; j < dim; ++j) acc[j] += w[j];
    });
    Tensor out({dim});
    for (std::size_t j = 0; j < dim; ++j) out[j] = sum[j] / static_cast<double>(n);
    return out;
}

void save_mean_code(const std::string& path, const MeanCode& mc) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot open " + path + " for writing");
        binio::write_magic(out, "LSAM");
        binio::write_u32(out, static_cast<std::uint32_t>(mc.mu.size()));
        for (const auto& t : mc.mu) write_tensor(out, t);
    }
    nlohmann::ordered_json j;
    j["k_samples"] = mc.k_samples;
    j["seed"] = mc.seed;
    j["generator_checksum"] = mc.generator_checksum;
    std::ofstream side(path + ".json");
    if (!side) throw ConfigError("cannot open " + path + ".json for writing");
    side << j.dump(2) << "\n";
}

MeanCode load_mean_code(const std::string& path) {
    MeanCode mc;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open mean code " + path);
    binio::expect_magic(in, "LSAM");
    const auto k = binio::read_u32(in);
    if (k == 0 || k > 4096) throw ConfigError("mean code: bad layer count");
    for (std::uint32_t l = 0; l < k; ++l) mc.mu.push_back(read_tensor(in));
    // Validates unit norms.
    mc.mu = LatentCode::sn(mc.mu).styles();

    std::ifstream side(path + ".json");
    if (!side) throw ConfigError("mean code sidecar " + path + ".json is missing");
    try {
        auto j = nlohmann::json::parse(side);
        mc.k_samples = j.at("k_samples").get<std::uint64_t>();
        mc.seed = j.at("seed").get<std::uint64_t>();
        mc.generator_checksum = j.at("generator_checksum").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("mean code sidecar: " + std::string(e.what()));
    }
    return mc;
}

Projection project_2d(const std::vector<LatentCode>& sn_codes) {
    if (sn_codes.size() < 3) throw ConfigError("project_2d needs at least 3 codes");
    std::size_t dim = 0;
    for (const auto& t : sn_codes.front().styles()) dim += t.numel();
    if (dim < 2) throw ShapeError("project_2d: codes need at least 2 coordinates");
    const std::size_t n = sn_codes.size();
    Eigen::MatrixXd x(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        if (sn_codes[i].space() != Space::SN) throw ConfigError("project_2d expects SN codes");
        std::size_t off = 0;
        for (const auto& t : sn_codes[i].styles()) {
            for (double v : t.data()) {
                if (off >= dim) throw ShapeError("project_2d: codes differ in size");
                x(i, off++) = v;
            }
        }
        if (off != dim) throw ShapeError("project_2d: codes differ in size");
    }

    Projection p;
    p.points.resize(n);
    Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const auto& vals = eig.eigenvalues();  // ascending
    const double top = vals(dim - 1), second = vals(dim - 2);
    const double tol = 1e-12 * std::max(1.0, std::abs(top));
    if (eig.info() != Eigen::Success || second <= tol) {
        p.degenerate = true;
        for (std::size_t i = 0; i < n; ++i) p.points[i] = {x(i, 0), x(i, 1)};
        return p;
    }
    Eigen::MatrixXd basis(dim, 2);
    basis.col(0) = eig.eigenvectors().col(dim - 1);
    basis.col(1) = eig.eigenvectors().col(dim - 2);
    // Fix the eigenvector signs: largest-magnitude entry positive.
    for (int c = 0; c < 2; ++c) {
        Eigen::Index arg;
        basis.col(c).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, c) < 0) basis.col(c) = -basis.col(c);
    }
    Eigen::MatrixXd proj = centered * basis;
    for (std::size_t i = 0; i < n; ++i) p.points[i] = {proj(i, 0), proj(i, 1)};
    return p;
}

std::string projection_csv(const Projection& p) {
    std::ostringstream os;
    os << "index,x,y,degenerate\n";
    char buf[96];
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.12e,%.12e,%d\n", i, p.points[i].first, p.points[i].second,
                      p.degenerate ? 1 : 0);
        os << buf;
    }
    return os.str();
}

}  // namespace lsap
