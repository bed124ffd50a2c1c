#include <algorithm>
#include <limits>

#include "xcc/simd/kernels.hpp"
#include "xcc/tensor/ops.hpp"

namespace xcc::inline XCC_PRECISION_NS {

using detail::finish_op;

namespace {

thread_local std::uint64_t g_conv_multiplies = 0;

struct ConvGeometry {
    std::size_t batch, c_in, h, w, c_out, k, dilation;
    std::size_t pad_top, pad_left, hp, wp, ho, wo;
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& kernel, const ConvOptions& opts) {
    if (input.rank() != 3 && input.rank() != 4) {
        throw ShapeError("conv2d input must be [C,H,W] or [N,C,H,W], got " + shape_str(input.shape()));
    }
    if (kernel.rank() != 4 || kernel.dim(2) != kernel.dim(3)) {
        throw ShapeError("conv2d kernel must be [C_out,C_in,k,k], got " + shape_str(kernel.shape()));
    }
    if (opts.dilation == 0) throw ValueError("conv2d dilation must be >= 1");
    ConvGeometry g{};
    const std::size_t off = input.rank() == 4 ? 1 : 0;
    g.batch = off ? input.dim(0) : 1;
    g.c_in = input.dim(off);
    g.h = input.dim(off + 1);
    g.w = input.dim(off + 2);
    g.c_out = kernel.dim(0);
    g.k = kernel.dim(2);
    g.dilation = opts.dilation;
    if (kernel.dim(1) != g.c_in) {
        throw ShapeError("conv2d: input has " + std::to_string(g.c_in) + " channels, kernel expects " +
                         std::to_string(kernel.dim(1)));
    }
    const std::size_t extent = g.dilation * (g.k - 1) + 1;
    if (opts.padding == Padding::same) {
        const std::size_t total = extent - 1;
        g.pad_top = g.pad_left = total / 2;
        g.hp = g.h + total;
        g.wp = g.w + total;
        g.ho = g.h;
        g.wo = g.w;
    } else {
        if (extent > g.h || extent > g.w) {
            throw ShapeError("conv2d: effective kernel extent " + std::to_string(extent) +
                             " exceeds input " + std::to_string(g.h) + "x" + std::to_string(g.w));
        }
        g.pad_top = g.pad_left = 0;
        g.hp = g.h;
        g.wp = g.w;
        g.ho = g.h - extent + 1;
        g.wo = g.w - extent + 1;
    }
    return g;
}

std::vector<Real> pad_input(const Tensor& input, const ConvGeometry& g) {
    std::vector<Real> xp(g.batch * g.c_in * g.hp * g.wp, Real(0));
    for (std::size_t p = 0; p < g.batch * g.c_in; ++p) {
        for (std::size_t i = 0; i < g.h; ++i) {
            std::copy_n(input.ptr() + (p * g.h + i) * g.w, g.w,
                        xp.data() + (p * g.hp + i + g.pad_top) * g.wp + g.pad_left);
        }
    }
    return xp;
}

Tensor conv2d_impl(const Tensor& input, const Tensor& kernel, const Tensor* bias,
                   const ConvOptions& opts) {
    const ConvGeometry g = conv_geometry(input, kernel, opts);
    if (bias != nullptr && bias->numel() != g.c_out) {
        throw ShapeError("conv2d bias must have C_out elements");
    }
    std::vector<Real> xp = pad_input(input, g);
    const std::size_t k = g.k, d = g.dilation;
    const std::size_t plane_out = g.ho * g.wo, plane_pad = g.hp * g.wp;
    std::vector<Real> out(g.batch * g.c_out * plane_out, Real(0));

    for (std::size_t n = 0; n < g.batch; ++n) {
        for (std::size_t o = 0; o < g.c_out; ++o) {
            Real* y = out.data() + (n * g.c_out + o) * plane_out;
            if (bias != nullptr) std::fill_n(y, plane_out, (*bias)[o]);
            for (std::size_t c = 0; c < g.c_in; ++c) {
                const Real* x = xp.data() + (n * g.c_in + c) * plane_pad;
                const Real* w = kernel.ptr() + (o * g.c_in + c) * k * k;
                for (std::size_t m = 0; m < k; ++m) {
                    for (std::size_t q = 0; q < k; ++q) {
                        const Real wv = w[m * k + q];
                        for (std::size_t i = 0; i < g.ho; ++i) {
                            simd::axpy(wv, x + (i + d * m) * g.wp + d * q, y + i * g.wo, g.wo);
                        }
                    }
                }
            }
        }
    }
    g_conv_multiplies += static_cast<std::uint64_t>(g.batch) * g.c_out * g.c_in * k * k * plane_out;

    Shape out_shape = input.rank() == 4 ? Shape{g.batch, g.c_out, g.ho, g.wo}
                                        : Shape{g.c_out, g.ho, g.wo};
    auto xi = input.impl(), wi = kernel.impl();
    std::shared_ptr<TensorData> bi = bias != nullptr ? bias->impl() : nullptr;
    return finish_op(
        "conv2d", std::move(out_shape), std::move(out), {&input, &kernel, bias},
        [xi, wi, bi, g, xp = std::move(xp)](TensorData& o) {
            const std::size_t k = g.k, d = g.dilation;
            const std::size_t plane_out = g.ho * g.wo, plane_pad = g.hp * g.wp;
            const Real* G = o.grad.data();
            const bool want_x = xi->requires_grad, want_w = wi->requires_grad;
            std::vector<Real> dxp;
            if (want_x) dxp.assign(xp.size(), Real(0));
            std::span<Real> gw = want_w ? wi->ensure_grad() : std::span<Real>{};
            for (std::size_t n = 0; n < g.batch; ++n) {
                for (std::size_t oc = 0; oc < g.c_out; ++oc) {
                    const Real* gy = G + (n * g.c_out + oc) * plane_out;
                    for (std::size_t c = 0; c < g.c_in; ++c) {
                        const Real* x = xp.data() + (n * g.c_in + c) * plane_pad;
                        const Real* w = wi->value.data() + (oc * g.c_in + c) * k * k;
                        Real* dw = want_w ? gw.data() + (oc * g.c_in + c) * k * k : nullptr;
                        Real* dx = want_x ? dxp.data() + (n * g.c_in + c) * plane_pad : nullptr;
                        for (std::size_t m = 0; m < k; ++m) {
                            for (std::size_t q = 0; q < k; ++q) {
                                Real acc = 0;
                                for (std::size_t i = 0; i < g.ho; ++i) {
                                    const std::size_t src = (i + d * m) * g.wp + d * q;
                                    if (want_w) acc += simd::dot(gy + i * g.wo, x + src, g.wo);
                                    if (want_x) simd::axpy(w[m * k + q], gy + i * g.wo, dx + src, g.wo);
                                }
                                if (want_w) dw[m * k + q] += acc;
                            }
                        }
                    }
                }
            }
            if (bi && bi->requires_grad) {
                auto gb = bi->ensure_grad();
                for (std::size_t n = 0; n < g.batch; ++n) {
                    for (std::size_t oc = 0; oc < g.c_out; ++oc) {
                        const Real* gy = G + (n * g.c_out + oc) * plane_out;
                        Real s = 0;
                        for (std::size_t i = 0; i < plane_out; ++i) s += gy[i];
                        gb[oc] += s;
                    }
                }
            }
            if (want_x) {
                auto gx = xi->ensure_grad();
                for (std::size_t p = 0; p < g.batch * g.c_in; ++p) {
                    for (std::size_t i = 0; i < g.h; ++i) {
                        const Real* src = dxp.data() + (p * g.hp + i + g.pad_top) * g.wp + g.pad_left;
                        Real* dst = gx.data() + (p * g.h + i) * g.w;
                        for (std::size_t j = 0; j < g.w; ++j) dst[j] += src[j];
                    }
                }
            }
        });
}

std::size_t spatial_planes(const Tensor& x, const char* op) {
    if (x.rank() < 2) throw ShapeError(std::string(op) + " needs at least [H, W]");
    return x.numel() / (x.dim(x.rank() - 2) * x.dim(x.rank() - 1));
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const ConvOptions& opts) {
    return conv2d_impl(input, kernel, nullptr, opts);
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, const ConvOptions& opts) {
    return conv2d_impl(input, kernel, &bias, opts);
}

std::uint64_t conv_multiply_count() { return g_conv_multiplies; }
void reset_conv_multiply_count() { g_conv_multiplies = 0; }

Tensor conv2d_ref_eq12(const Tensor& input, const Tensor& kernel, std::size_t dilation) {
    if (input.rank() != 2 || kernel.rank() != 2 || kernel.dim(0) != kernel.dim(1)) {
        throw ShapeError("conv2d_ref_eq12 expects [H,W] input and [k,k] kernel");
    }
    if (dilation == 0) throw ValueError("dilation must be >= 1");
    const std::size_t h = input.dim(0), w = input.dim(1), k = kernel.dim(0);
    const auto d = static_cast<long>(dilation);
    Tensor out(Shape{h, w});
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            Real acc = 0;
            for (std::size_t m = 0; m < k; ++m) {
                for (std::size_t n = 0; n < k; ++n) {
                    const long si = static_cast<long>(i) - d * static_cast<long>(m);
                    const long sj = static_cast<long>(j) - d * static_cast<long>(n);
                    if (si < 0 || sj < 0 || si >= static_cast<long>(h) || sj >= static_cast<long>(w)) {
                        continue;
                    }
                    acc += input[static_cast<std::size_t>(si) * w + static_cast<std::size_t>(sj)] *
                           kernel[m * k + n];
                }
            }
            out[i * w + j] = acc;
        }
    }
    return out;
}

Tensor conv_transpose2x2(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
    if (x.rank() != 4 || kernel.rank() != 4 || kernel.dim(0) != x.dim(1) || kernel.dim(2) != 2 ||
        kernel.dim(3) != 2 || bias.numel() != kernel.dim(1)) {
        throw ShapeError("conv_transpose2x2: x " + shape_str(x.shape()) + " kernel " +
                         shape_str(kernel.shape()));
    }
    const std::size_t N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3), Co = kernel.dim(1);
    const std::size_t Ho = 2 * H, Wo = 2 * W;
    std::vector<Real> out(N * Co * Ho * Wo);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t o = 0; o < Co; ++o) {
            std::fill_n(out.data() + (n * Co + o) * Ho * Wo, Ho * Wo, bias[o]);
        }
        for (std::size_t c = 0; c < Ci; ++c) {
            const Real* xin = x.ptr() + (n * Ci + c) * H * W;
            for (std::size_t o = 0; o < Co; ++o) {
                const Real* w = kernel.ptr() + (c * Co + o) * 4;
                Real* y = out.data() + (n * Co + o) * Ho * Wo;
                for (std::size_t i = 0; i < H; ++i) {
                    for (std::size_t j = 0; j < W; ++j) {
                        const Real v = xin[i * W + j];
                        y[(2 * i) * Wo + 2 * j] += v * w[0];
                        y[(2 * i) * Wo + 2 * j + 1] += v * w[1];
                        y[(2 * i + 1) * Wo + 2 * j] += v * w[2];
                        y[(2 * i + 1) * Wo + 2 * j + 1] += v * w[3];
                    }
                }
            }
        }
    }
    auto xi = x.impl(), wi = kernel.impl(), bi = bias.impl();
    return finish_op(
        "conv_transpose2x2", Shape{N, Co, Ho, Wo}, std::move(out), {&x, &kernel, &bias},
        [xi, wi, bi, N, Ci, H, W, Co, Ho, Wo](TensorData& o) {
            const Real* G = o.grad.data();
            std::span<Real> gx = xi->requires_grad ? xi->ensure_grad() : std::span<Real>{};
            std::span<Real> gw = wi->requires_grad ? wi->ensure_grad() : std::span<Real>{};
            for (std::size_t n = 0; n < N; ++n) {
                for (std::size_t c = 0; c < Ci; ++c) {
                    const Real* xin = xi->value.data() + (n * Ci + c) * H * W;
                    for (std::size_t oc = 0; oc < Co; ++oc) {
                        const Real* w = wi->value.data() + (c * Co + oc) * 4;
                        const Real* gy = G + (n * Co + oc) * Ho * Wo;
                        Real dw[4] = {0, 0, 0, 0};
                        for (std::size_t i = 0; i < H; ++i) {
                            for (std::size_t j = 0; j < W; ++j) {
                                const Real g00 = gy[(2 * i) * Wo + 2 * j];
                                const Real g01 = gy[(2 * i) * Wo + 2 * j + 1];
                                const Real g10 = gy[(2 * i + 1) * Wo + 2 * j];
                                const Real g11 = gy[(2 * i + 1) * Wo + 2 * j + 1];
                                const Real v = xin[i * W + j];
                                if (!gx.empty()) {
                                    gx[(n * Ci + c) * H * W + i * W + j] +=
                                        g00 * w[0] + g01 * w[1] + g10 * w[2] + g11 * w[3];
                                }
                                dw[0] += v * g00;
                                dw[1] += v * g01;
                                dw[2] += v * g10;
                                dw[3] += v * g11;
                            }
                        }
                        if (!gw.empty()) {
                            for (int t = 0; t < 4; ++t) gw[(c * Co + oc) * 4 + t] += dw[t];
                        }
                    }
                }
            }
            if (bi->requires_grad) {
                auto gb = bi->ensure_grad();
                for (std::size_t n = 0; n < N; ++n) {
                    for (std::size_t oc = 0; oc < Co; ++oc) {
                        const Real* gy = G + (n * Co + oc) * Ho * Wo;
                        Real s = 0;
                        for (std::size_t i = 0; i < Ho * Wo; ++i) s += gy[i];
                        gb[oc] += s;
                    }
                }
            }
        });
}

Tensor maxpool2d(const Tensor& x) {
    const std::size_t planes = spatial_planes(x, "maxpool2d");
    const std::size_t H = x.dim(x.rank() - 2), W = x.dim(x.rank() - 1);
    const std::size_t Ho = (H + 1) / 2, Wo = (W + 1) / 2;
    std::vector<Real> out(planes * Ho * Wo);
    std::vector<std::size_t> argmax(out.size());
    for (std::size_t p = 0; p < planes; ++p) {
        const Real* in = x.ptr() + p * H * W;
        for (std::size_t i = 0; i < Ho; ++i) {
            for (std::size_t j = 0; j < Wo; ++j) {
                Real best = -std::numeric_limits<Real>::infinity();
                std::size_t best_idx = 0;
                bool first = true;
                for (std::size_t a = 0; a < 2; ++a) {
                    for (std::size_t b = 0; b < 2; ++b) {
                        const std::size_t r = 2 * i + a, c = 2 * j + b;
                        if (r >= H || c >= W) continue;  // -inf padding
                        const Real v = in[r * W + c];
                        if (first || v > best) {
                            best = v;
                            best_idx = r * W + c;
                            first = false;
                        }
                    }
                }
                out[(p * Ho + i) * Wo + j] = best;
                argmax[(p * Ho + i) * Wo + j] = p * H * W + best_idx;
            }
        }
    }
    Shape shape = x.shape();
    shape[shape.size() - 2] = Ho;
    shape[shape.size() - 1] = Wo;
    auto xi = x.impl();
    return finish_op("maxpool2d", std::move(shape), std::move(out), {&x},
                     [xi, argmax = std::move(argmax)](TensorData& o) {
                         if (!xi->requires_grad) return;
                         auto g = xi->ensure_grad();
                         for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += o.grad[i];
                     });
}

Tensor avgpool2d(const Tensor& x) {
    const std::size_t planes = spatial_planes(x, "avgpool2d");
    const std::size_t H = x.dim(x.rank() - 2), W = x.dim(x.rank() - 1);
    if (H % 2 != 0 || W % 2 != 0) throw ShapeError("avgpool2d needs even spatial dims");
    const std::size_t Ho = H / 2, Wo = W / 2;
    std::vector<Real> out(planes * Ho * Wo);
    for (std::size_t p = 0; p < planes; ++p) {
        const Real* in = x.ptr() + p * H * W;
        for (std::size_t i = 0; i < Ho; ++i) {
            for (std::size_t j = 0; j < Wo; ++j) {
                out[(p * Ho + i) * Wo + j] =
                    Real(0.25) * (in[2 * i * W + 2 * j] + in[2 * i * W + 2 * j + 1] +
                                  in[(2 * i + 1) * W + 2 * j] + in[(2 * i + 1) * W + 2 * j + 1]);
            }
        }
    }
    Shape shape = x.shape();
    shape[shape.size() - 2] = Ho;
    shape[shape.size() - 1] = Wo;
    auto xi = x.impl();
    return finish_op("avgpool2d", std::move(shape), std::move(out), {&x},
                     [xi, planes, H, W, Ho, Wo](TensorData& o) {
                         if (!xi->requires_grad) return;
                         auto g = xi->ensure_grad();
                         for (std::size_t p = 0; p < planes; ++p) {
                             for (std::size_t i = 0; i < H; ++i) {
                                 for (std::size_t j = 0; j < W; ++j) {
                                     g[p * H * W + i * W + j] +=
                                         Real(0.25) * o.grad[(p * Ho + i / 2) * Wo + j / 2];
                                 }
                             }
                         }
                     });
}

Tensor upsample_nearest2x(const Tensor& x) {
    const std::size_t planes = spatial_planes(x, "upsample_nearest2x");
    const std::size_t H = x.dim(x.rank() - 2), W = x.dim(x.rank() - 1);
    const std::size_t Ho = 2 * H, Wo = 2 * W;
    std::vector<Real> out(planes * Ho * Wo);
    for (std::size_t p = 0; p < planes; ++p) {
        for (std::size_t i = 0; i < Ho; ++i) {
            for (std::size_t j = 0; j < Wo; ++j) {
                out[(p * Ho + i) * Wo + j] = x[p * H * W + (i / 2) * W + j / 2];
            }
        }
    }
    Shape shape = x.shape();
    shape[shape.size() - 2] = Ho;
    shape[shape.size() - 1] = Wo;
    auto xi = x.impl();
    return finish_op("upsample_nearest2x", std::move(shape), std::move(out), {&x},
                     [xi, planes, H, W, Ho, Wo](TensorData& o) {
                         if (!xi->requires_grad) return;
                         auto g = xi->ensure_grad();
                         for (std::size_t p = 0; p < planes; ++p) {
                             for (std::size_t i = 0; i < Ho; ++i) {
                                 for (std::size_t j = 0; j < Wo; ++j) {
                                     g[p * H * W + (i / 2) * W + j / 2] += o.grad[(p * Ho + i) * Wo + j];
                                 }
                             }
                         }
                     });
}

}  // namespace xcc::inline XCC_PRECISION_NS
