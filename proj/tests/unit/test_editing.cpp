#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>

#include "lsap/editing.hpp"
#include "lsap/error.hpp"
#include "lsap/inversion.hpp"

using namespace lsap;

namespace {

const Generator& toy() {
    static const Generator g = Generator::random(GeneratorConfig{}, 7);
    return g;
}

const EditDirection& bright() {
    static const EditDirection d = find_direction(toy(), brightness(), 2000, 3);
    return d;
}

std::vector<Tensor> in_distribution(std::uint64_t seed, int n) {
    std::vector<Tensor> out;
    for (int i = 0; i < n; ++i) out.push_back(toy().generate_from_z(sample_z(toy(), seed, i)));
    return out;
}

}  // namespace

TEST_CASE("attributes") {
    Tensor img({3, 4, 4}, 0.25);
    CHECK(brightness()(img) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(asymmetry()(img) == 0.0);
    img[0] = 1.0;  // left edge of channel 0, row 0
    CHECK(asymmetry()(img) == doctest::Approx(0.75 / 24.0));
    CHECK(attribute_by_name("-brightness")(img) == -brightness()(img));
    CHECK(attribute_by_name("-brightness").name == "-brightness");
    CHECK_THROWS_AS(attribute_by_name("smile"), ConfigError);
    CHECK_THROWS_AS(asymmetry()(Tensor({4, 4}, 0.0)), ShapeError);
}

TEST_CASE("brightness direction separates held-out samples") {
    const auto& d = bright();
    CHECK(d.attribute == "brightness");
    CHECK(l2_norm(d.d.data()) == doctest::Approx(1.0).epsilon(1e-12));
    MESSAGE("fit quality " << d.fit_quality);
    CHECK(d.fit_quality > 0.7);
}

TEST_CASE("negated attribute gives the opposite direction") {
    auto neg = find_direction(toy(), negated(brightness()), 2000, 3);
    const auto& pos = bright();
    double m = 0.0;
    for (std::size_t i = 0; i < pos.d.numel(); ++i) m = std::max(m, std::abs(pos.d[i] + neg.d[i]));
    CHECK(m < 1e-9);
}

TEST_CASE("edits along the brightness direction move mean brightness monotonically") {
    // Monte-Carlo oracle over 200 fresh codes.
    const auto& d = bright();
    std::map<double, double> mean_by_alpha;
    for (double a : {-2.0, 0.0, 2.0}) {
        double s = 0.0;
        for (int i = 0; i < 200; ++i) {
            auto c = LatentCode::w(toy().mapping(sample_z(toy(), 901, i)));
            s += brightness()(generate(toy(), edit(c, d, a)));
        }
        mean_by_alpha[a] = s / 200.0;
    }
    CHECK(mean_by_alpha[-2.0] < mean_by_alpha[0.0]);
    CHECK(mean_by_alpha[0.0] < mean_by_alpha[2.0]);
}

TEST_CASE("edit algebra") {
    const auto& d = bright();
    auto w = LatentCode::w(toy().mapping(sample_z(toy(), 5, 0)));
    CHECK(edit(w, d, 0.0) == w);

    Tensor rows({6, 32});
    for (std::size_t i = 0; i < rows.numel(); ++i) rows[i] = std::sin(0.37 * static_cast<double>(i));
    auto wp = LatentCode::wplus(rows);
    const auto moved = edit(wp, d, 1.5);
    for (std::size_t l = 0; l < 6; ++l)
        for (std::size_t j = 0; j < 32; ++j)
            CHECK(moved.vec()[l * 32 + j] == rows[l * 32 + j] + 1.5 * d.d[j]);

    // Exact up to the rounding of one add and one subtract per component.
    for (double a : {0.3, -2.0, 7.25}) {
        for (const auto& c : {w, wp}) {
            const auto back = edit(edit(c, d, a), d, -a);
            for (std::size_t i = 0; i < c.vec().numel(); ++i) {
                const double x = c.vec()[i];
                const double ulp = std::numeric_limits<double>::epsilon() * std::max(std::abs(x), std::abs(a));
                CHECK(std::abs(back.vec()[i] - x) <= 2.0 * ulp);
            }
        }
    }

    CHECK_THROWS_AS(edit(LatentCode::z(sample_z(toy(), 5, 0)), d, 1.0), ConfigError);
    EditDirection short_d{Tensor::vector({1.0, 0.0}), "x", 1.0};
    CHECK_THROWS_AS(edit(w, short_d, 1.0), ShapeError);
}

TEST_CASE("constant attribute is rejected") {
    ToyAttribute flat{"flat", [](const Tensor&) { return 3.0; }};
    CHECK_THROWS_AS(find_direction(toy(), flat, 400, 1), NumericError);
    CHECK_THROWS_AS(find_direction(toy(), brightness(), 100, 1), ConfigError);
}

TEST_CASE("direction files round trip") {
    const auto& d = bright();
    auto back = parse_direction_json(direction_json(d));
    CHECK(back.attribute == d.attribute);
    CHECK(back.fit_quality == d.fit_quality);
    CHECK(back.d.values() == d.d.values());

    const auto path = (std::filesystem::temp_directory_path() / "lsap_test_direction.json").string();
    save_direction(path, d);
    CHECK(load_direction(path).d.values() == d.d.values());
    std::remove(path.c_str());

    CHECK_THROWS_AS(parse_direction_json("{\"attribute\":\"b\",\"fit_quality\":0.5,\"direction\":[2.0]}"),
                    ConfigError);
    CHECK_THROWS_AS(parse_direction_json("{\"attribute\":\"b\"}"), ConfigError);
    CHECK_THROWS_AS(parse_direction_json("not json"), ConfigError);
}

TEST_CASE("a perfect embedder has zero editing inconsistency") {
    // Lookup embedder: every image it will see was produced from a known code.
    const auto& d = bright();
    std::vector<LatentCode> codes;
    std::vector<Tensor> targets;
    for (int i = 0; i < 10; ++i) {
        codes.push_back(LatentCode::w(toy().mapping(sample_z(toy(), 61, i))));
        targets.push_back(generate(toy(), codes.back()));
    }
    std::vector<std::pair<Tensor, LatentCode>> table;
    for (const auto& c : codes)
        for (double a : {0.0, 2.0})
            table.emplace_back(generate(toy(), edit(c, d, a)), edit(c, d, a));
    Embedder lookup = [&](const Tensor& x) {
        for (const auto& [img, c] : table)
            if (max_abs_diff(img, x) == 0.0) return c;
        throw NumericError("image not in table");
    };
    auto r = lec(toy(), lookup, d, 2.0, targets);
    CHECK(r.flagged == 0);
    CHECK(r.mean_lec == 0.0);
    for (const auto& row : r.rows) CHECK(row.lec == 0.0);
}

TEST_CASE("zero-alpha LEC is plain re-embedding drift and bounds edited LEC") {
    const auto& d = bright();
    EncoderTrainConfig cfg;
    cfg.iterations = 100;
    cfg.batch_size = 4;
    cfg.seed = 11;
    const auto enc = train_encoder(toy(), estimate_mean_code(toy(), 2000, 1), estimate_mean_w(toy(), 2000, 2), cfg);
    REQUIRE_FALSE(enc.aborted);
    Embedder embed = [&](const Tensor& x) { return invert_encode(x, enc.encoder); };
    const auto targets = in_distribution(62, 12);

    auto r0 = lec(toy(), embed, d, 0.0, targets);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto c = embed(targets[i]);
        const auto again = embed(generate(toy(), c));
        double drift = 0.0;
        for (std::size_t j = 0; j < c.vec().numel(); ++j)
            drift += (again.vec()[j] - c.vec()[j]) * (again.vec()[j] - c.vec()[j]);
        CHECK(r0.rows[i].lec == drift);
    }
    for (double a : {-2.0, 1.0, 2.0}) CHECK(lec(toy(), embed, d, a, targets).mean_lec >= r0.mean_lec);
}

TEST_CASE("failing embeds are flagged, not dropped") {
    const auto& d = bright();
    auto targets = in_distribution(63, 3);
    Embedder bad = [](const Tensor&) -> LatentCode { throw NumericError("boom"); };
    auto r = lec(toy(), bad, d, 1.0, targets);
    CHECK(r.rows.size() == 3);
    CHECK(r.flagged == 3);
    CHECK(std::isnan(r.mean_lec));
    const auto csv = lec_csv(r);
    CHECK(csv.rfind("target_id,lec,revert_mse,flagged\n", 0) == 0);
    CHECK(csv.find(",1\n") != std::string::npos);
}
