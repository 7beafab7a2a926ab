#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lsap/error.hpp"
#include "lsap/latent.hpp"
#include "lsap/rng.hpp"

using namespace lsap;

namespace {

const Generator& toy() {
    static const Generator g = Generator::random(GeneratorConfig{}, 7);
    return g;
}

double max_diff(const StyleSet& a, const StyleSet& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) m = std::max(m, max_abs_diff(a[l], b[l]));
    return m;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("lsap_test_" + name);
    std::filesystem::create_directories(p);
    return p;
}

// Mean silhouette of 2-D points with binary labels.
double silhouette(const std::vector<std::pair<double, double>>& pts, const std::vector<int>& label) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double same = 0.0, other = 0.0;
        std::size_t ns = 0, no = 0;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            const double d = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
            if (label[i] == label[j]) {
                same += d;
                ++ns;
            } else {
                other += d;
                ++no;
            }
        }
        const double a = same / ns, b = other / no;
        total += (b - a) / std::max(a, b);
    }
    return total / pts.size();
}

}  // namespace

TEST_CASE("to_style") {
    const auto& g = toy();
    Rng rng(1);
    auto w = LatentCode::w(g.mapping(sample_standard_normal(rng, {32})));
    auto s = to_style(g, w);
    CHECK(s.space() == Space::S);
    CHECK(to_style(g, broadcast_wplus(w, 6)).styles() == s.styles());

    auto s0 = to_style(g, LatentCode::w(Tensor({32}, 0.0)));
    for (std::size_t l = 0; l < 6; ++l) CHECK(s0.styles()[l] == g.params().affine_bias[l]);

    // Layer-by-layer recomputation of A_l w + b_l.
    const auto& p = g.params();
    for (std::size_t l = 0; l < 6; ++l) {
        const auto& a = p.affine_weight[l];
        for (std::size_t i = 0; i < a.dim(0); ++i) {
            double v = p.affine_bias[l][i];
            for (std::size_t j = 0; j < 32; ++j) v += a[i * 32 + j] * w.vec()[j];
            CHECK(std::abs(s.styles()[l][i] - v) < 1e-13);
        }
    }

    // W+ rows drive their own layers.
    Tensor wp({6, 32});
    for (std::size_t i = 0; i < wp.numel(); ++i) wp[i] = rng.normal();
    auto sp = to_style(g, LatentCode::wplus(wp));
    for (std::size_t l = 0; l < 6; ++l) {
        Tensor row({32});
        for (std::size_t j = 0; j < 32; ++j) row[j] = wp[l * 32 + j];
        CHECK(sp.styles()[l] == g.affine(row, l));
    }

    CHECK_THROWS_AS(to_style(g, LatentCode::z(Tensor({32}))), ConfigError);
    CHECK_THROWS_AS(to_style(g, s), ConfigError);
}

TEST_CASE("normalize_style") {
    auto s = LatentCode::s({Tensor::vector({3, 4, 0, 0}), Tensor::vector({0, 0, 2})});
    auto n = normalize_style(s);
    CHECK(n.space() == Space::SN);
    CHECK(n.styles()[0] == Tensor::vector({0.6, 0.8, 0, 0}));
    CHECK(n.styles()[1] == Tensor::vector({0, 0, 1}));

    const auto& g = toy();
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        auto code = to_style(g, LatentCode::w(g.mapping(sample_standard_normal(rng, {32}))));
        auto sn = normalize_style(code);
        for (const auto& l : sn.styles()) CHECK(std::abs(l2_norm(l.data()) - 1.0) < 1e-12);
        CHECK(max_diff(normalize_style(sn).styles(), sn.styles()) < 1e-15);
        StyleSet scaled = code.styles();
        for (auto& l : scaled)
            for (auto& v : l.data()) v *= 7.3;
        CHECK(max_diff(normalize_style(LatentCode::s(scaled)).styles(), sn.styles()) < 1e-15);
    }

    CHECK_THROWS_AS(normalize_style(LatentCode::s({Tensor::vector({1, 0}), Tensor({3}, 0.0)})), NumericError);
    CHECK_THROWS_AS(LatentCode::sn({Tensor::vector({1, 1})}), NumericError);
}

TEST_CASE("mean code") {
    const auto& g = toy();

    SUBCASE("a single sample is its own mean") {
        auto mc = estimate_mean_code(g, 1, 5);
        auto sn = normalize_layers(g.styles_from_w(g.mapping(sample_z(g, 5, 0))));
        CHECK(max_diff(mc.mu, sn) < 1e-15);
        CHECK(mc.k_samples == 1);
        CHECK(mc.seed == 5);
        CHECK(mc.generator_checksum == generator_checksum(g));
    }

    SUBCASE("symmetric in the sample order") {
        std::vector<StyleSet> codes;
        for (int i = 0; i < 200; ++i) codes.push_back(normalize_layers(g.styles_from_w(g.mapping(sample_z(g, 6, i)))));
        auto fwd = mean_of_normalized(codes);
        std::reverse(codes.begin(), codes.end());
        Rng rng(3);
        for (std::size_t i = codes.size() - 1; i > 0; --i) std::swap(codes[i], codes[rng.next_u64() % (i + 1)]);
        CHECK(max_diff(fwd, mean_of_normalized(codes)) < 1e-14);
        for (const auto& l : fwd) CHECK(std::abs(l2_norm(l.data()) - 1.0) < 1e-12);
    }

    SUBCASE("independent of the worker count") {
        setenv("LSAP_THREADS", "1", 1);
        auto one = estimate_mean_code(g, 3000, 9);
        setenv("LSAP_THREADS", "4", 1);
        auto four = estimate_mean_code(g, 3000, 9);
        unsetenv("LSAP_THREADS");
        CHECK(one.mu == four.mu);
    }

    SUBCASE("average cosine distance settles as k grows") {
        auto small = estimate_mean_code(g, 10000, 11);
        auto large = estimate_mean_code(g, 50000, 12);
        std::vector<StyleSet> fresh;
        for (int i = 0; i < 2000; ++i) fresh.push_back(normalize_layers(g.styles_from_w(g.mapping(sample_z(g, 13, i)))));
        auto avg = [&](const MeanCode& mc) {
            double total = 0.0;
            for (const auto& s : fresh)
                for (std::size_t l = 0; l < s.size(); ++l) total += 1.0 - dot(s[l].data(), mc.mu[l].data());
            return total / (fresh.size() * 6.0);
        };
        CHECK(std::abs(avg(small) - avg(large)) < 1e-3);
    }

    CHECK_THROWS_AS(estimate_mean_code(g, 0, 1), ConfigError);
}

TEST_CASE("mean w") {
    const auto& g = toy();
    auto w = estimate_mean_w(g, 100, 4);
    Tensor sum({32}, 0.0);
    for (int i = 0; i < 100; ++i) {
        auto wi = g.mapping(sample_z(g, 4, i));
        for (std::size_t j = 0; j < 32; ++j) sum[j] += wi[j];
    }
    for (std::size_t j = 0; j < 32; ++j) CHECK(std::abs(w[j] - sum[j] / 100) < 1e-13);
}

TEST_CASE("code and mean-code files") {
    const auto& g = toy();
    Rng rng(5);
    auto w = LatentCode::w(g.mapping(sample_standard_normal(rng, {32})));
    std::vector<LatentCode> codes = {LatentCode::z(sample_standard_normal(rng, {32})), w, broadcast_wplus(w, 6),
                                     to_style(g, w), normalize_style(to_style(g, w))};
    std::stringstream ss;
    write_codes(ss, codes);
    CHECK(read_codes(ss) == codes);
    for (const auto& c : codes) CHECK_NOTHROW(c.validate(g));
    CHECK_THROWS_AS(LatentCode::w(Tensor({31})).validate(g), ShapeError);

    auto dir = temp_dir("latent");
    auto mc = estimate_mean_code(g, 64, 3);
    const auto path = (dir / "mean.lsam").string();
    save_mean_code(path, mc);
    auto back = load_mean_code(path);
    CHECK(back.mu == mc.mu);
    CHECK(back.k_samples == 64);
    CHECK(back.seed == 3);
    CHECK(back.generator_checksum == generator_checksum(g));
    std::ifstream side(path + ".json");
    auto j = nlohmann::json::parse(side);
    CHECK(j.at("k_samples") == 64);
    CHECK(j.at("generator_checksum") == generator_checksum(g));
    std::filesystem::remove(path + ".json");
    CHECK_THROWS_AS(load_mean_code(path), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("project_2d") {
    const auto& g = toy();
    auto sn = normalize_style(to_style(g, LatentCode::w(g.mapping(sample_z(g, 1, 0)))));

    SUBCASE("identical codes are degenerate") {
        auto p = project_2d({sn, sn, sn, sn});
        CHECK(p.degenerate);
        CHECK(p.points.size() == 4);
        for (const auto& pt : p.points) CHECK(pt == p.points.front());
    }
    SUBCASE("synthetic codes separate from channel-rescaled ones") {
        // Fixed positive per-channel gains skew each layer's direction.
        Rng rng(8);
        StyleSet gain;
        for (auto d : g.style_dims()) {
            Tensor t({d});
            for (auto& v : t.data()) v = std::exp(1.5 * rng.normal());
            gain.push_back(t);
        }
        std::vector<LatentCode> codes;
        std::vector<int> label;
        for (int i = 0; i < 40; ++i) {
            auto s = g.styles_from_w(g.mapping(sample_z(g, 21, i)));
            codes.push_back(normalize_style(LatentCode::s(s)));
            label.push_back(0);
            for (std::size_t l = 0; l < s.size(); ++l)
                for (std::size_t j = 0; j < s[l].numel(); ++j) s[l][j] *= gain[l][j];
            codes.push_back(normalize_style(LatentCode::s(s)));
            label.push_back(1);
        }
        auto p = project_2d(codes);
        CHECK_FALSE(p.degenerate);
        REQUIRE(p.points.size() == codes.size());
        CHECK(silhouette(p.points, label) > 0.0);
        // PC1 alone splits the groups.
        double m0 = 0, m1 = 0;
        for (std::size_t i = 0; i < codes.size(); ++i) (label[i] ? m1 : m0) += p.points[i].first / 40.0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < codes.size(); ++i) {
            const bool closer1 = std::abs(p.points[i].first - m1) < std::abs(p.points[i].first - m0);
            correct += (closer1 == (label[i] == 1));
        }
        CHECK(correct == codes.size());

        auto csv = projection_csv(p);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(codes.size() + 1));
    }
    CHECK_THROWS_AS(project_2d({sn, sn}), ConfigError);
}
