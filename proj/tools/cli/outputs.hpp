#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lsap::cli {

// Files are written into a hidden staging directory inside the output
// directory and moved into place only by commit(). If a command fails first,
// the destructor deletes the staging directory, so a failed run never leaves
// partial outputs behind.
class Outputs {
public:
    explicit Outputs(const std::string& dir);
    ~Outputs();
    Outputs(const Outputs&) = delete;
    Outputs& operator=(const Outputs&) = delete;

    // Staging path for a final file name (no directories).
    std::string path(const std::string& name) const;
    void write_text(const std::string& name, const std::string& content) const;
    // Moves every staged file (including sidecars a writer added) into place.
    std::vector<std::string> commit();

private:
    std::filesystem::path dir_;
    std::filesystem::path staging_;
    bool committed_ = false;
};

// Writes one file atomically (temp file and rename), outside any Outputs.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace lsap::cli
