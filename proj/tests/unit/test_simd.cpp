#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "xcc/simd/kernels.hpp"

namespace simd = xcc::simd;

namespace {

template <typename T>
std::vector<T> random_vec(std::size_t n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> dist(-1, 1);
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(dist(gen));
    return v;
}

template <typename T>
void check_equivalence(double tol) {
    if (!simd::avx2_available()) GTEST_SKIP() << "AVX2 variant not available";
    std::mt19937_64 gen(11);
    // lengths straddle the vector widths and unroll factors
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 33u, 64u, 100u, 1027u}) {
        auto a = random_vec<T>(n, gen), b = random_vec<T>(n, gen);
        const double ref = simd::scalar::dot(a.data(), b.data(), n);
        const double fast = simd::avx2::dot(a.data(), b.data(), n);
        EXPECT_NEAR(ref, fast, tol * (1 + std::sqrt(static_cast<double>(n)))) << "dot n=" << n;

        auto y1 = b, y2 = b;
        simd::scalar::axpy(static_cast<T>(0.37), a.data(), y1.data(), n);
        simd::avx2::axpy(static_cast<T>(0.37), a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], tol) << "axpy n=" << n << " i=" << i;
    }
}

}  // namespace

TEST(Simd, FloatVariantsAgree) { check_equivalence<float>(1e-5); }
TEST(Simd, DoubleVariantsAgree) { check_equivalence<double>(1e-13); }

TEST(Simd, ScalarAxpyIsExact) {
    std::vector<double> x{1, 2, 3}, y{1, 1, 1};
    simd::scalar::axpy(2.0, x.data(), y.data(), 3);
    EXPECT_EQ(y, (std::vector<double>{3, 5, 7}));
    EXPECT_EQ(simd::scalar::dot(x.data(), x.data(), 3), 14.0);
}

TEST(Simd, ForceIsa) {
    const auto before = simd::active_isa();
    ASSERT_TRUE(simd::force_isa(simd::Isa::scalar));
    EXPECT_EQ(simd::active_isa(), simd::Isa::scalar);
    std::vector<float> x{1, 2}, y{3, 4};
    EXPECT_EQ(simd::dot(x.data(), y.data(), 2), 11.0f);
    EXPECT_EQ(simd::force_isa(simd::Isa::avx2), simd::avx2_available());
    simd::force_isa(before);
    EXPECT_EQ(simd::isa_name(simd::Isa::scalar), "scalar");
}
