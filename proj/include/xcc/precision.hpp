#pragma once

// Scalar type selection. The library is compiled once per precision; each
// build places its symbols in its own inline namespace (xcc::r32 / xcc::r64)
// so an f32 and an f64 build can coexist in one executable.

#if defined(XCC_REAL_F64)
#define XCC_PRECISION_NS r64
#else
#define XCC_PRECISION_NS r32
#endif

namespace xcc::inline XCC_PRECISION_NS {

#if defined(XCC_REAL_F64)
using Real = double;
#else
using Real = float;
#endif

inline constexpr bool kIsDouble = sizeof(Real) == sizeof(double);

}  // namespace xcc::inline XCC_PRECISION_NS
