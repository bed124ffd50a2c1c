#include "xcc/cxp/clahe.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace xcc::inline XCC_PRECISION_NS {

namespace {

struct TileMap {
    std::array<double, 256> lut{};
    bool passthrough = false;

    double apply(Real v, std::uint8_t level) const { return passthrough ? static_cast<double>(v) : lut[level]; }
};

TileMap build_tile(const std::vector<std::uint8_t>& levels, std::size_t width, std::size_t r0, std::size_t r1,
                   std::size_t c0, std::size_t c1, double clip) {
    std::array<long, 256> hist{};
    for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) ++hist[levels[r * width + c]];
    }
    const long npx = static_cast<long>((r1 - r0) * (c1 - c0));
    TileMap t;
    t.passthrough = std::count_if(hist.begin(), hist.end(), [](long h) { return h > 0; }) <= 1;
    if (t.passthrough) return t;

    const long limit = std::max<long>(static_cast<long>(clip * static_cast<double>(npx) / 256.0), 1);
    long excess = 0;
    for (long& h : hist) {
        if (h > limit) {
            excess += h - limit;
            h = limit;
        }
    }
    const long each = excess / 256;
    long rem = excess - each * 256;
    for (long& h : hist) h += each;
    if (rem > 0) {
        const long step = std::max<long>(256 / rem, 1);
        for (long bin = 0; bin < 256 && rem > 0; bin += step, --rem) ++hist[static_cast<std::size_t>(bin)];
    }
    long run = 0;
    for (std::size_t b = 0; b < 256; ++b) {
        run += hist[b];
        t.lut[b] = static_cast<double>(run) / static_cast<double>(npx);
    }
    return t;
}

}  // namespace

GrayImage clahe(const GrayImage& img, std::size_t ty, std::size_t tx, double clip) {
    if (ty == 0 || tx == 0) throw ValueError("clahe: tile grid must be positive");
    if (!(clip >= 1.0)) throw ValueError("clahe: clip limit must be >= 1");
    if (img.height < ty || img.width < tx) {
        throw ShapeError("clahe: image " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                         " smaller than tile grid");
    }
    const std::size_t H = img.height, W = img.width;
    std::vector<std::uint8_t> levels(img.pixels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = to_level(img.pixels[i]);

    auto bound = [](std::size_t t, std::size_t extent, std::size_t tiles) {
        return static_cast<std::size_t>(std::lround(static_cast<double>(t) * static_cast<double>(extent) /
                                                    static_cast<double>(tiles)));
    };
    std::vector<TileMap> maps;
    maps.reserve(ty * tx);
    for (std::size_t a = 0; a < ty; ++a) {
        for (std::size_t b = 0; b < tx; ++b) {
            maps.push_back(build_tile(levels, W, bound(a, H, ty), bound(a + 1, H, ty), bound(b, W, tx),
                                      bound(b + 1, W, tx), clip));
        }
    }

    GrayImage out(H, W);
    for (std::size_t r = 0; r < H; ++r) {
        const double fy = (static_cast<double>(r) + 0.5) * static_cast<double>(ty) / static_cast<double>(H) - 0.5;
        const long y0 = static_cast<long>(std::floor(fy));
        const double wy = fy - static_cast<double>(y0);
        const std::size_t ya = static_cast<std::size_t>(std::clamp(y0, 0L, static_cast<long>(ty) - 1));
        const std::size_t yb = static_cast<std::size_t>(std::clamp(y0 + 1, 0L, static_cast<long>(ty) - 1));
        for (std::size_t c = 0; c < W; ++c) {
            const double fx = (static_cast<double>(c) + 0.5) * static_cast<double>(tx) / static_cast<double>(W) - 0.5;
            const long x0 = static_cast<long>(std::floor(fx));
            const double wx = fx - static_cast<double>(x0);
            const std::size_t xa = static_cast<std::size_t>(std::clamp(x0, 0L, static_cast<long>(tx) - 1));
            const std::size_t xb = static_cast<std::size_t>(std::clamp(x0 + 1, 0L, static_cast<long>(tx) - 1));
            const Real v = img.at(r, c);
            const std::uint8_t lv = levels[r * W + c];
            if (maps[ya * tx + xa].passthrough && maps[ya * tx + xb].passthrough &&
                maps[yb * tx + xa].passthrough && maps[yb * tx + xb].passthrough) {
                out.at(r, c) = v;
                continue;
            }
            const double top = (1 - wx) * maps[ya * tx + xa].apply(v, lv) + wx * maps[ya * tx + xb].apply(v, lv);
            const double bot = (1 - wx) * maps[yb * tx + xa].apply(v, lv) + wx * maps[yb * tx + xb].apply(v, lv);
            out.at(r, c) = static_cast<Real>(std::clamp((1 - wy) * top + wy * bot, 0.0, 1.0));
        }
    }
    return out;
}

}  // namespace xcc::inline XCC_PRECISION_NS
