#pragma once

// Inner-loop arithmetic kernels shared by the tensor operations.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The variant is selected once at runtime from CPUID;
// setting XCC_SIMD=scalar in the environment (or calling force_isa) pins the
// scalar path. Both variants are deterministic for a fixed ISA, but they
// differ in summation order, so results agree only up to rounding.

#include <cstddef>
#include <string_view>

namespace xcc::simd {

enum class Isa { scalar, avx2 };

/// ISA currently used by the dispatching entry points.
Isa active_isa();

/// True when the CPU and the build both provide the AVX2 variant.
bool avx2_available();

/// Pins the dispatch to `isa`. Returns false (and changes nothing) if the
/// requested variant is unavailable.
bool force_isa(Isa isa);

std::string_view isa_name(Isa isa);

// Dispatching entry points.
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
/// y[i] += alpha * x[i]
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

namespace scalar {
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace xcc::simd
