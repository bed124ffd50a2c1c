#include <atomic>
#include <cstdlib>
#include <cstring>

#include "xcc/simd/kernels.hpp"

namespace xcc::simd {

namespace {

bool cpu_has_avx2() {
#if defined(XCC_HAVE_AVX2_SOURCE) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    const char* env = std::getenv("XCC_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool avx2_available() {
    static const bool available = cpu_has_avx2();
    return available;
}

bool force_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2_available()) return false;
    current().store(isa, std::memory_order_relaxed);
    return true;
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

float dot(const float* a, const float* b, std::size_t n) {
    return active_isa() == Isa::avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

double dot(const double* a, const double* b, std::size_t n) {
    return active_isa() == Isa::avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
    if (active_isa() == Isa::avx2) {
        avx2::axpy(alpha, x, y, n);
    } else {
        scalar::axpy(alpha, x, y, n);
    }
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    if (active_isa() == Isa::avx2) {
        avx2::axpy(alpha, x, y, n);
    } else {
        scalar::axpy(alpha, x, y, n);
    }
}

#if !defined(XCC_HAVE_AVX2_SOURCE)
// Non-x86 builds: the avx2 namespace forwards to the reference kernels so
// callers and tests still link. avx2_available() reports false.
namespace avx2 {
float dot(const float* a, const float* b, std::size_t n) { return scalar::dot(a, b, n); }
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(float alpha, const float* x, float* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
}  // namespace avx2
#endif

}  // namespace xcc::simd
