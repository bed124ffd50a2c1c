#pragma once

#include <cstdint>

#include "xcc/precision.hpp"

namespace xcc::inline XCC_PRECISION_NS {

/// Counter-based random stream.
///
/// Draw k of a stream is `splitmix64_mix(seed + (k + 1) * 0x9E3779B97F4A7C15)`
/// where `counter` is the index of the next draw. The mapping uses only
/// 64-bit integer arithmetic, so identical (seed, counter) pairs produce
/// identical integers on every platform. Uniforms take the top 53 bits;
/// normals use Box-Muller on two consecutive uniforms.
class RngStream {
 public:
    explicit RngStream(std::uint64_t seed = 0, std::uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal.
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    /// Independent child stream keyed by `stream_id`.
    RngStream split(std::uint64_t stream_id) const;

 private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace xcc::inline XCC_PRECISION_NS
