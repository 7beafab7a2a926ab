#include "outputs.hpp"

#include <algorithm>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "lsap/error.hpp"

namespace lsap::cli {

namespace fs = std::filesystem;

Outputs::Outputs(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
    staging_ = dir_ / (".lsap-staging-" + std::to_string(::getpid()));
    fs::remove_all(staging_, ec);
    fs::create_directory(staging_, ec);
    if (ec) throw ConfigError("cannot create staging directory in " + dir + ": " + ec.message());
}

Outputs::~Outputs() {
    std::error_code ec;
    fs::remove_all(staging_, ec);
}

std::string Outputs::path(const std::string& name) const {
    if (name.empty() || name.find('/') != std::string::npos) throw ConfigError("bad output name '" + name + "'");
    return (staging_ / name).string();
}

void Outputs::write_text(const std::string& name, const std::string& content) const {
    std::ofstream out(path(name), std::ios::binary);
    out << content;
    if (!out) throw ConfigError("cannot write " + name);
}

std::vector<std::string> Outputs::commit() {
    if (committed_) throw ConfigError("outputs already committed");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(staging_)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<std::string> names;
    for (const auto& f : files) {
        std::error_code ec;
        fs::rename(f, dir_ / f.filename(), ec);
        if (ec) throw ConfigError("cannot move " + f.filename().string() + " into place: " + ec.message());
        names.push_back(f.filename().string());
    }
    committed_ = true;
    return names;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        if (!out) throw ConfigError("cannot write " + path);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot write " + path);
    }
}

}  // namespace lsap::cli
