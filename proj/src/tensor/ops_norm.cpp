#include <algorithm>
#include <cmath>

#include "xcc/tensor/ops.hpp"

namespace xcc::inline XCC_PRECISION_NS {

using detail::finish_op;

namespace {

// Backward of xhat = (x - mean) / sd over one group of m elements where sd
// depends on x through the (biased) variance.
void normalized_group_backward(const Real* dxhat, const Real* xhat, Real inv_sd, std::size_t m,
                               Real* dx) {
    Real s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < m; ++i) {
        s1 += dxhat[i];
        s2 += dxhat[i] * xhat[i];
    }
    const Real inv_m = Real(1) / static_cast<Real>(m);
    for (std::size_t i = 0; i < m; ++i) {
        dx[i] += inv_sd * (dxhat[i] - inv_m * s1 - xhat[i] * inv_m * s2);
    }
}

}  // namespace

Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                 Mode mode) {
    if (x.rank() < 2) throw ShapeError("batchnorm expects [N, C, ...]");
    const std::size_t N = x.dim(0), C = x.dim(1);
    const std::size_t S = x.numel() / (N * C);
    if (gamma.numel() != C || beta.numel() != C) throw ShapeError("batchnorm: gamma/beta must have C elements");
    if (state.running_mean.numel() != C) state.running_mean = Tensor::zeros({C});
    if (state.running_var.numel() != C) state.running_var = Tensor::ones({C});
    if (mode == Mode::train && N < 2) throw ValueError("batchnorm needs a batch of at least 2 in train mode");

    const std::size_t M = N * S;
    std::vector<Real> mean(C), inv_sd(C);
    if (mode == Mode::train) {
        for (std::size_t c = 0; c < C; ++c) {
            Real s = 0;
            for (std::size_t n = 0; n < N; ++n) {
                const Real* p = x.ptr() + (n * C + c) * S;
                for (std::size_t i = 0; i < S; ++i) s += p[i];
            }
            const Real mu = s / static_cast<Real>(M);
            Real v = 0;
            for (std::size_t n = 0; n < N; ++n) {
                const Real* p = x.ptr() + (n * C + c) * S;
                for (std::size_t i = 0; i < S; ++i) v += (p[i] - mu) * (p[i] - mu);
            }
            const Real var = v / static_cast<Real>(M);
            mean[c] = mu;
            inv_sd[c] = Real(1) / std::sqrt(var + state.eps);
            const Real unbiased = v / static_cast<Real>(M - 1);
            state.running_mean[c] = (1 - state.momentum) * state.running_mean[c] + state.momentum * mu;
            state.running_var[c] = (1 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
        }
    } else {
        for (std::size_t c = 0; c < C; ++c) {
            mean[c] = state.running_mean[c];
            inv_sd[c] = Real(1) / std::sqrt(state.running_var[c] + state.eps);
        }
    }

    std::vector<Real> xhat(x.numel()), out(x.numel());
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t base = (n * C + c) * S;
            for (std::size_t i = 0; i < S; ++i) {
                xhat[base + i] = (x[base + i] - mean[c]) * inv_sd[c];
                out[base + i] = gamma[c] * xhat[base + i] + beta[c];
            }
        }
    }
    auto xi = x.impl(), gi = gamma.impl(), bi = beta.impl();
    const bool batch_stats = mode == Mode::train;
    return finish_op(
        "batchnorm", x.shape(), std::move(out), {&x, &gamma, &beta},
        [xi, gi, bi, xhat = std::move(xhat), inv_sd = std::move(inv_sd), N, C, S,
         batch_stats](TensorData& o) {
            const Real* G = o.grad.data();
            if (gi->requires_grad || bi->requires_grad) {
                auto gg = gi->ensure_grad();
                auto gb = bi->ensure_grad();
                for (std::size_t n = 0; n < N; ++n) {
                    for (std::size_t c = 0; c < C; ++c) {
                        const std::size_t base = (n * C + c) * S;
                        for (std::size_t i = 0; i < S; ++i) {
                            gg[c] += G[base + i] * xhat[base + i];
                            gb[c] += G[base + i];
                        }
                    }
                }
            }
            if (!xi->requires_grad) return;
            auto gx = xi->ensure_grad();
            std::vector<Real> dxhat(N * S), xh(N * S), dx(N * S);
            for (std::size_t c = 0; c < C; ++c) {
                const Real gam = gi->value[c];
                if (!batch_stats) {
                    for (std::size_t n = 0; n < N; ++n) {
                        const std::size_t base = (n * C + c) * S;
                        for (std::size_t i = 0; i < S; ++i) gx[base + i] += G[base + i] * gam * inv_sd[c];
                    }
                    continue;
                }
                // Gather the channel into contiguous buffers.
                for (std::size_t n = 0; n < N; ++n) {
                    const std::size_t base = (n * C + c) * S;
                    for (std::size_t i = 0; i < S; ++i) {
                        dxhat[n * S + i] = G[base + i] * gam;
                        xh[n * S + i] = xhat[base + i];
                    }
                }
                std::fill(dx.begin(), dx.end(), Real(0));
                normalized_group_backward(dxhat.data(), xh.data(), inv_sd[c], N * S, dx.data());
                for (std::size_t n = 0; n < N; ++n) {
                    const std::size_t base = (n * C + c) * S;
                    for (std::size_t i = 0; i < S; ++i) gx[base + i] += dx[n * S + i];
                }
            }
        });
}

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Real eps) {
    const std::size_t L = x.dim(x.rank() - 1);
    const std::size_t R = x.numel() / L;
    if (gamma.numel() != L || beta.numel() != L) throw ShapeError("layernorm: gamma/beta must match last axis");
    std::vector<Real> xhat(x.numel()), out(x.numel()), inv_sd(R);
    for (std::size_t r = 0; r < R; ++r) {
        const Real* p = x.ptr() + r * L;
        Real s = 0;
        for (std::size_t i = 0; i < L; ++i) s += p[i];
        const Real mu = s / static_cast<Real>(L);
        Real v = 0;
        for (std::size_t i = 0; i < L; ++i) v += (p[i] - mu) * (p[i] - mu);
        inv_sd[r] = Real(1) / std::sqrt(v / static_cast<Real>(L) + eps);
        for (std::size_t i = 0; i < L; ++i) {
            xhat[r * L + i] = (p[i] - mu) * inv_sd[r];
            out[r * L + i] = gamma[i] * xhat[r * L + i] + beta[i];
        }
    }
    auto xi = x.impl(), gi = gamma.impl(), bi = beta.impl();
    return finish_op("layernorm", x.shape(), std::move(out), {&x, &gamma, &beta},
                     [xi, gi, bi, xhat = std::move(xhat), inv_sd = std::move(inv_sd), R,
                      L](TensorData& o) {
                         const Real* G = o.grad.data();
                         if (gi->requires_grad || bi->requires_grad) {
                             auto gg = gi->ensure_grad();
                             auto gb = bi->ensure_grad();
                             for (std::size_t r = 0; r < R; ++r) {
                                 for (std::size_t i = 0; i < L; ++i) {
                                     gg[i] += G[r * L + i] * xhat[r * L + i];
                                     gb[i] += G[r * L + i];
                                 }
                             }
                         }
                         if (!xi->requires_grad) return;
                         auto gx = xi->ensure_grad();
                         std::vector<Real> dxhat(L);
                         for (std::size_t r = 0; r < R; ++r) {
                             for (std::size_t i = 0; i < L; ++i) dxhat[i] = G[r * L + i] * gi->value[i];
                             normalized_group_backward(dxhat.data(), xhat.data() + r * L, inv_sd[r], L,
                                                       gx.data() + r * L);
                         }
                     });
}

Tensor adain(const Tensor& x, const Tensor& style_mean, const Tensor& style_std, Real eps) {
    if (x.rank() != 4) throw ShapeError("adain expects [N, C, H, W]");
    const std::size_t N = x.dim(0), C = x.dim(1), S = x.dim(2) * x.dim(3);
    if (style_mean.numel() != N * C || style_std.numel() != N * C) {
        throw ShapeError("adain: style statistics must be [N, C]");
    }
    std::vector<Real> xhat(x.numel()), out(x.numel()), inv_sd(N * C);
    std::vector<char> clamped(N * C, 0);
    for (std::size_t g = 0; g < N * C; ++g) {
        const Real* p = x.ptr() + g * S;
        Real s = 0;
        for (std::size_t i = 0; i < S; ++i) s += p[i];
        const Real mu = s / static_cast<Real>(S);
        Real v = 0;
        for (std::size_t i = 0; i < S; ++i) v += (p[i] - mu) * (p[i] - mu);
        const Real sd = std::sqrt(v / static_cast<Real>(S));
        clamped[g] = sd < eps;
        inv_sd[g] = Real(1) / std::max(sd, eps);
        for (std::size_t i = 0; i < S; ++i) {
            xhat[g * S + i] = (p[i] - mu) * inv_sd[g];
            out[g * S + i] = style_std[g] * xhat[g * S + i] + style_mean[g];
        }
    }
    auto xi = x.impl(), mi = style_mean.impl(), si = style_std.impl();
    return finish_op(
        "adain", x.shape(), std::move(out), {&x, &style_mean, &style_std},
        [xi, mi, si, xhat = std::move(xhat), inv_sd = std::move(inv_sd),
         clamped = std::move(clamped), N, C, S](TensorData& o) {
            const Real* G = o.grad.data();
            std::span<Real> gm = mi->requires_grad ? mi->ensure_grad() : std::span<Real>{};
            std::span<Real> gs = si->requires_grad ? si->ensure_grad() : std::span<Real>{};
            std::span<Real> gx = xi->requires_grad ? xi->ensure_grad() : std::span<Real>{};
            std::vector<Real> dxhat(S);
            for (std::size_t g = 0; g < N * C; ++g) {
                Real sum_g = 0, sum_gx = 0;
                for (std::size_t i = 0; i < S; ++i) {
                    sum_g += G[g * S + i];
                    sum_gx += G[g * S + i] * xhat[g * S + i];
                }
                if (!gm.empty()) gm[g] += sum_g;
                if (!gs.empty()) gs[g] += sum_gx;
                if (gx.empty()) continue;
                const Real s = si->value[g];
                for (std::size_t i = 0; i < S; ++i) dxhat[i] = G[g * S + i] * s;
                if (clamped[g]) {
                    // sd is the constant eps here; only the mean depends on x.
                    Real m = 0;
                    for (std::size_t i = 0; i < S; ++i) m += dxhat[i];
                    m /= static_cast<Real>(S);
                    for (std::size_t i = 0; i < S; ++i) gx[g * S + i] += (dxhat[i] - m) * inv_sd[g];
                } else {
                    normalized_group_backward(dxhat.data(), xhat.data() + g * S, inv_sd[g], S,
                                              gx.data() + g * S);
                }
            }
        });
}

}  // namespace xcc::inline XCC_PRECISION_NS
