#pragma once

#include <array>
#include <cstdint>

#include "lsap/tensor.hpp"

namespace lsap {

// Counter-based generator: Philox4x32-10 keyed by the seed, with the stream id
// occupying the upper half of the 128-bit counter. Every (seed, stream) pair
// yields an independent, platform-stable sequence, so parallel workers can
// each own a stream without coordinating.
//
// Normals use Box-Muller on consecutive pairs of 53-bit uniforms in (0, 1].
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Fresh generator on another stream under the same seed.
    Rng split(std::uint64_t stream) const { return Rng(seed_, stream); }

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    // Uniform on (0, 1]; never returns 0 so log() is always defined.
    double uniform();
    double normal();

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int block_pos_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// Raw Philox4x32-10 bijection, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

Tensor sample_standard_normal(Rng& rng, const Shape& shape);

}  // namespace lsap
