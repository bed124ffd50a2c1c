#include "xcc/cxp/resize.hpp"

#include <algorithm>
#include <cmath>

namespace xcc::inline XCC_PRECISION_NS {

double cubic_weight(double t, double a) {
    t = std::abs(t);
    if (t <= 1) return ((a + 2) * t - (a + 3)) * t * t + 1;
    if (t < 2) return ((a * t - 5 * a) * t + 8 * a) * t - 4 * a;
    return 0;
}

namespace {

// Per-output-index source base and 4 tap weights along one axis.
struct AxisTaps {
    std::vector<std::size_t> idx;  // 4 clamped source indices per output
    std::vector<double> weight;    // 4 weights per output
};

AxisTaps axis_taps(std::size_t in, std::size_t out, double a) {
    AxisTaps t;
    t.idx.resize(out * 4);
    t.weight.resize(out * 4);
    const double alpha = static_cast<double>(out) / static_cast<double>(in);
    for (std::size_t o = 0; o < out; ++o) {
        const double src = static_cast<double>(o) / alpha;
        const long base = static_cast<long>(std::floor(src));
        for (long k = -1; k <= 2; ++k) {
            const long s = std::clamp(base + k, 0L, static_cast<long>(in) - 1);
            t.idx[o * 4 + static_cast<std::size_t>(k + 1)] = static_cast<std::size_t>(s);
            t.weight[o * 4 + static_cast<std::size_t>(k + 1)] = cubic_weight(src - static_cast<double>(base + k), a);
        }
    }
    return t;
}

}  // namespace

std::vector<Real> resize_bicubic_plane(const std::vector<Real>& src, std::size_t h, std::size_t w,
                                       std::size_t out_h, std::size_t out_w, double a) {
    if (out_h < 2 || out_w < 2) throw ShapeError("resize_bicubic: output dims must be at least 2");
    if (h == 0 || w == 0 || src.size() != h * w) throw ShapeError("resize_bicubic: bad source plane");
    const AxisTaps ty = axis_taps(h, out_h, a), tx = axis_taps(w, out_w, a);
    std::vector<Real> out(out_h * out_w);
    for (std::size_t i = 0; i < out_h; ++i) {
        for (std::size_t j = 0; j < out_w; ++j) {
            // offsets from the floor tap, so flat regions are reproduced exactly
            const double anchor = src[ty.idx[i * 4 + 1] * w + tx.idx[j * 4 + 1]];
            double acc = 0;
            for (std::size_t m = 0; m < 4; ++m) {
                const Real* row = src.data() + ty.idx[i * 4 + m] * w;
                double r = 0;
                for (std::size_t n = 0; n < 4; ++n) r += (row[tx.idx[j * 4 + n]] - anchor) * tx.weight[j * 4 + n];
                acc += r * ty.weight[i * 4 + m];
            }
            out[i * out_w + j] = static_cast<Real>(anchor + acc);
        }
    }
    return out;
}

GrayImage resize_bicubic(const GrayImage& img, std::size_t out_h, std::size_t out_w, double a) {
    GrayImage out(out_h, out_w);
    out.pixels = resize_bicubic_plane(img.pixels, img.height, img.width, out_h, out_w, a);
    for (Real& v : out.pixels) v = std::clamp(v, Real(0), Real(1));
    return out;
}

}  // namespace xcc::inline XCC_PRECISION_NS
