#pragma once

#include <cstddef>
#include <string>

#include "lsap/tensor.hpp"

namespace lsap::cli {

// Writes a [3, H, W] image as 8-bit RGB, mapping [-1, 1] linearly onto
// [0, 255]. Returns how many channel values fell outside [-1, 1] and were
// clamped. Encoder settings are fixed (zlib level 9, no filtering, no time
// chunk) so equal images give equal files.
std::size_t write_png(const std::string& path, const Tensor& image);

}  // namespace lsap::cli
