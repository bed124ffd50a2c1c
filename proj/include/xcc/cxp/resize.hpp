#pragma once

#include "xcc/cxp/image.hpp"

namespace xcc::inline XCC_PRECISION_NS {

/// Cubic convolution kernel with free parameter a (a = -0.5 is Catmull-Rom).
double cubic_weight(double t, double a);

/// Bicubic resampling of an arbitrary real plane. Output pixel (y, x) reads
/// the source at (y / alpha_y, x / alpha_x), alpha = out / in, over the 4x4
/// neighbourhood floor(src) - 1 .. floor(src) + 2 with clamped coordinates.
/// No clipping.
std::vector<Real> resize_bicubic_plane(const std::vector<Real>& src, std::size_t h, std::size_t w,
                                       std::size_t out_h, std::size_t out_w, double a = -0.5);

/// resize_bicubic_plane on an image, clipped to [0, 1]. Throws ShapeError
/// for output dims below 2.
GrayImage resize_bicubic(const GrayImage& img, std::size_t out_h, std::size_t out_w, double a = -0.5);

}  // namespace xcc::inline XCC_PRECISION_NS
