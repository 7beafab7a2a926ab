#include <doctest.h>

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cli/outputs.hpp"
#include "cli/png.hpp"
#include "cli/run_config.hpp"
#include "lsap/error.hpp"
#include "lsap/generator.hpp"

using namespace lsap;
using namespace lsap::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lsap_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string with(const std::string& section, const std::string& key, const std::string& value) {
    auto j = nlohmann::json::parse(dump_run_config(RunConfig{}));
    j[section][key] = nlohmann::json::parse(value);
    return j.dump();
}

// Decodes an 8-bit RGB PNG with libpng's reader.
std::vector<unsigned char> read_rgb(const fs::path& p, unsigned& w, unsigned& h) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    REQUIRE(png_image_begin_read_from_file(&img, p.c_str()));
    img.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(img));
    REQUIRE(png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr));
    w = img.width;
    h = img.height;
    return buf;
}

int run(const std::string& args) {
    const int status = std::system((std::string(LSAP_BIN) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config dump round trip is byte identical") {
    RunConfig c;
    c.inversion.lambda = 0.1;
    c.ablation.lambdas = {0.0, 1.0 / 3.0, 2.5};
    c.editing.alpha = -0.7;
    const std::string a = dump_run_config(c);
    const RunConfig back = parse_run_config(a);
    CHECK(dump_run_config(back) == a);
    CHECK(back.ablation.lambdas[1] == 1.0 / 3.0);
    CHECK(back.inversion.lambda == 0.1);
}

TEST_CASE("partial config keeps defaults") {
    const RunConfig c = parse_run_config(R"({"seed": 9, "editing": {"alpha": 1.5}})");
    CHECK(c.seed == 9);
    CHECK(c.editing.alpha == 1.5);
    CHECK(dump_run_config(parse_run_config("{}")) == dump_run_config(RunConfig{}));
}

TEST_CASE("config rejects unknown keys, wrong types and bad values") {
    CHECK_THROWS_AS(parse_run_config(R"({"sed": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"generator": {"kk": 6}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[]"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("inversion", "steps", "-3")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("inversion", "steps", "2.5")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("inversion", "lambda", "\"big\"")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("inversion", "alignment_term", "1")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("inversion", "space", "\"S\"")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("inversion", "lambda", "-1")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("ablation", "lambdas", "[0, 0.5, 0.25]")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("ablation", "lambdas", "[0, 0]")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("ablation", "lambdas", "[]")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("editing", "attribute", "\"hue\"")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(with("sample", "count", "0")), ConfigError);
    CHECK_NOTHROW(parse_run_config(with("inversion", "space", "\"w+\"")));
}

TEST_CASE("outputs appear only on commit") {
    const fs::path dir = scratch("outputs");
    {
        Outputs out(dir.string());
        out.write_text("a.json", "{}\n");
        out.write_text("b.csv", "x\n");
        CHECK_FALSE(fs::exists(dir / "a.json"));
        const auto names = out.commit();
        CHECK(names == std::vector<std::string>{"a.json", "b.csv"});
        CHECK_THROWS_AS(out.commit(), ConfigError);
        CHECK_THROWS_AS(out.path("sub/dir.txt"), ConfigError);
    }
    CHECK(slurp(dir / "b.csv") == "x\n");
    {
        Outputs out(dir.string());
        out.write_text("c.json", "partial");
        // destroyed without commit, as when a command throws
    }
    CHECK_FALSE(fs::exists(dir / "c.json"));
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
    CHECK(entries == 2);
}

TEST_CASE("png maps [-1, 1] onto [0, 255] and counts clamped values") {
    const fs::path dir = scratch("png");
    Tensor img({3, 2, 3}, 0.0);
    const double values[] = {-1.0, 1.0, 0.0, 2.0, -3.0, 0.5};
    for (std::size_t i = 0; i < 6; ++i) img[i] = values[i];  // channel 0
    img[6] = -1.0;                                            // channel 1, pixel (0, 0)
    img[17] = 1.0000001;                                      // channel 2, pixel (1, 2)
    CHECK(write_png((dir / "a.png").string(), img) == 3);

    unsigned w = 0, h = 0;
    const auto rgb = read_rgb(dir / "a.png", w, h);
    REQUIRE(w == 3);
    REQUIRE(h == 2);
    const int expect_r[] = {0, 255, 128, 255, 0, 191};
    for (std::size_t p = 0; p < 6; ++p) CHECK(int(rgb[p * 3]) == expect_r[p]);
    CHECK(int(rgb[1]) == 0);
    CHECK(int(rgb[4]) == 128);
    CHECK(int(rgb[5 * 3 + 2]) == 255);

    write_png((dir / "b.png").string(), img);
    CHECK(slurp(dir / "a.png") == slurp(dir / "b.png"));

    img[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(write_png((dir / "c.png").string(), img), NumericError);
    CHECK_THROWS_AS(write_png((dir / "d.png").string(), Tensor({3, 4}, 0.0)), ShapeError);
}

TEST_CASE("binary exit codes and failure diagnostics") {
    const fs::path dir = scratch("bin");
    const std::string out = " --out " + dir.string();
    CHECK(run("--help") == 0);
    CHECK(run("") == 2);
    CHECK(run("no-such-command") == 2);

    {
        std::ofstream(dir / "bad.json") << R"({"inversion": {"stepz": 3}})";
    }
    CHECK(run("print-config --config " + (dir / "bad.json").string()) == 2);

    REQUIRE(run("init-gen" + out) == 0);
    REQUIRE(run("mean-code --k 500" + out) == 0);
    CHECK(fs::exists(dir / "generator.lsag"));
    CHECK(run("invert --space S" + out) == 2);

    const Generator g = Generator::random(GeneratorConfig{}, 7);
    Tensor target(g.image_shape(), 0.0);
    target[5] = std::numeric_limits<double>::quiet_NaN();
    save_tensor((dir / "nan.lsat").string(), target);
    CHECK(run("invert --steps 3 --target " + (dir / "nan.lsat").string() + out) == 3);
    REQUIRE(fs::exists(dir / "diagnostic.json"));
    const auto diag = nlohmann::json::parse(slurp(dir / "diagnostic.json"));
    CHECK(diag["status"] == "numeric_failure");
    CHECK(diag["command"] == "invert");
    CHECK_FALSE(fs::exists(dir / "code.lsac"));
    CHECK_FALSE(fs::exists(dir / "report.json"));
    for (const auto& e : fs::directory_iterator(dir)) {
        CHECK(e.path().filename().string().rfind(".lsap-staging", 0) != 0);
    }

    CHECK(run("invert --steps 3" + out) == 0);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "inverted.png"));
}
