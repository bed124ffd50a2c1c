#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "xcc/tensor/layers.hpp"

namespace testing_support {

using namespace xcc;

inline std::vector<double> to_vec(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

inline Tensor from_vec(Shape shape, const std::vector<double>& v) {
    return Tensor(std::move(shape), std::vector<Real>(v.begin(), v.end()));
}

inline Tensor random_tensor(Shape shape, RngStream& rng, double lo = -1, double hi = 1) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = static_cast<Real>(rng.uniform(lo, hi));
    return t;
}

inline Tensor param(Tensor t) {
    t.set_requires_grad(true);
    return t;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return INFINITY;
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Fixed projection so that gradient checks see a non-trivial upstream gradient.
inline Tensor weighted_sum(const Tensor& y, std::uint64_t seed = 99) {
    RngStream rng(seed);
    Tensor w = random_tensor(y.shape(), rng);
    return sum(mul(y, w));
}

}  // namespace testing_support
