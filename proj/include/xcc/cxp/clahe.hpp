#pragma once

#include "xcc/cxp/image.hpp"

namespace xcc::inline XCC_PRECISION_NS {

/// Contrast limited adaptive histogram equalization.
///
/// Pixels are quantized to 256 levels. Tile (a, b) covers rows
/// [round(a*H/ty), round((a+1)*H/ty)) and the analogous columns. Each tile
/// histogram is clipped at max(floor(clip * tile_pixels / 256), 1); the
/// clipped excess is added evenly to all bins and the remainder is spread
/// one count per bin at stride max(256 / remainder, 1) from bin 0. The tile
/// mapping is cdf(level) / tile_pixels. A tile whose pixels all share one
/// level maps every value to itself. Output pixels blend the mappings of
/// the four nearest tile centres bilinearly (clamped at the borders).
GrayImage clahe(const GrayImage& img, std::size_t tiles_y = 8, std::size_t tiles_x = 8, double clip = 2.0);

}  // namespace xcc::inline XCC_PRECISION_NS
