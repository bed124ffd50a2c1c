#include "xcc/tensor/rng.hpp"

#include <cmath>
#include <numbers>

namespace xcc::inline XCC_PRECISION_NS {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return splitmix64_mix(seed_ + counter_ * kGamma);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n <= 1) return 0;
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

RngStream RngStream::split(std::uint64_t stream_id) const {
    return RngStream(splitmix64_mix(seed_ ^ splitmix64_mix(stream_id + 0x632BE59BD9B4E019ULL)), 0);
}

}  // namespace xcc::inline XCC_PRECISION_NS
