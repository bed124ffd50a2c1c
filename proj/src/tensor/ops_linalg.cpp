#include <algorithm>
#include <cmath>
#include <limits>

#include "xcc/simd/kernels.hpp"
#include "xcc/tensor/ops.hpp"

namespace xcc::inline XCC_PRECISION_NS {

using detail::finish_op;

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    }
    const std::size_t m = a.dim(0), p = a.dim(1), n = b.dim(1);
    std::vector<Real> out(m * n, Real(0));
    const Real* A = a.ptr();
    const Real* B = b.ptr();
    for (std::size_t i = 0; i < m; ++i) {
        Real* row = out.data() + i * n;
        for (std::size_t k = 0; k < p; ++k) {
            const Real aik = A[i * p + k];
            if (aik != 0) simd::axpy(aik, B + k * n, row, n);
        }
    }
    auto ai = a.impl(), bi = b.impl();
    return finish_op("matmul", Shape{m, n}, std::move(out), {&a, &b},
                     [ai, bi, m, p, n](TensorData& o) {
                         const Real* G = o.grad.data();
                         if (ai->requires_grad) {
                             // dA = G * B^T
                             auto ga = ai->ensure_grad();
                             for (std::size_t i = 0; i < m; ++i) {
                                 for (std::size_t k = 0; k < p; ++k) {
                                     ga[i * p + k] +=
                                         simd::dot(G + i * n, bi->value.data() + k * n, n);
                                 }
                             }
                         }
                         if (bi->requires_grad) {
                             // dB = A^T * G
                             auto gb = bi->ensure_grad();
                             for (std::size_t i = 0; i < m; ++i) {
                                 for (std::size_t k = 0; k < p; ++k) {
                                     const Real aik = ai->value[i * p + k];
                                     if (aik != 0) simd::axpy(aik, G + i * n, gb.data() + k * n, n);
                                 }
                             }
                         }
                     });
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose expects a matrix, got " + shape_str(a.shape()));
    const std::size_t r = a.dim(0), c = a.dim(1);
    std::vector<Real> out(a.numel());
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a[i * c + j];
    }
    auto ai = a.impl();
    return finish_op("transpose", Shape{c, r}, std::move(out), {&a}, [ai, r, c](TensorData& o) {
        if (!ai->requires_grad) return;
        auto g = ai->ensure_grad();
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) g[i * c + j] += o.grad[j * r + i];
        }
    });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    return add_bias(matmul(x, w), b);
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) throw ShapeError("softmax axis out of range");
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
    for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
    const std::size_t n = x.dim(axis);
    std::vector<Real> out(x.numel());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            Real mx = -std::numeric_limits<Real>::infinity();
            for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, x[base + j * inner]);
            Real s = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const Real e = std::exp(x[base + j * inner] - mx);
                out[base + j * inner] = e;
                s += e;
            }
            for (std::size_t j = 0; j < n; ++j) out[base + j * inner] /= s;
        }
    }
    auto xi = x.impl();
    return finish_op("softmax", x.shape(), std::move(out), {&x},
                     [xi, outer, inner, n](TensorData& o) {
                         if (!xi->requires_grad) return;
                         auto g = xi->ensure_grad();
                         for (std::size_t a = 0; a < outer; ++a) {
                             for (std::size_t in = 0; in < inner; ++in) {
                                 const std::size_t base = a * n * inner + in;
                                 Real dot = 0;
                                 for (std::size_t j = 0; j < n; ++j) {
                                     dot += o.grad[base + j * inner] * o.value[base + j * inner];
                                 }
                                 for (std::size_t j = 0; j < n; ++j) {
                                     const std::size_t idx = base + j * inner;
                                     g[idx] += o.value[idx] * (o.grad[idx] - dot);
                                 }
                             }
                         }
                     });
}

Tensor multihead_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t batch,
                           std::size_t heads, std::vector<Real>* attention) {
    if (q.rank() != 2 || q.shape() != k.shape() || q.shape() != v.shape()) {
        throw ShapeError("attention: q/k/v must share a [B*T, d] shape");
    }
    const std::size_t rows = q.dim(0), d = q.dim(1);
    if (batch == 0 || rows % batch != 0) throw ShapeError("attention: rows not divisible by batch");
    if (heads == 0 || d % heads != 0) throw ShapeError("attention: d not divisible by heads");
    const std::size_t T = rows / batch, dh = d / heads;
    const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(dh));

    // weights[b][h][t][s]
    std::vector<Real> weights(batch * heads * T * T);
    std::vector<Real> out(rows * d, Real(0));
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t h = 0; h < heads; ++h) {
            Real* P = weights.data() + (b * heads + h) * T * T;
            for (std::size_t t = 0; t < T; ++t) {
                const Real* qt = q.ptr() + (b * T + t) * d + h * dh;
                Real mx = -std::numeric_limits<Real>::infinity();
                for (std::size_t s = 0; s < T; ++s) {
                    const Real* ks = k.ptr() + (b * T + s) * d + h * dh;
                    P[t * T + s] = simd::dot(qt, ks, dh) * inv_sqrt;
                    mx = std::max(mx, P[t * T + s]);
                }
                Real total = 0;
                for (std::size_t s = 0; s < T; ++s) {
                    P[t * T + s] = std::exp(P[t * T + s] - mx);
                    total += P[t * T + s];
                }
                Real* ot = out.data() + (b * T + t) * d + h * dh;
                for (std::size_t s = 0; s < T; ++s) {
                    P[t * T + s] /= total;
                    simd::axpy(P[t * T + s], v.ptr() + (b * T + s) * d + h * dh, ot, dh);
                }
            }
        }
    }
    if (attention != nullptr) *attention = weights;

    auto qi = q.impl(), ki = k.impl(), vi = v.impl();
    return finish_op(
        "multihead_attention", Shape{rows, d}, std::move(out), {&q, &k, &v},
        [qi, ki, vi, weights = std::move(weights), batch, heads, T, d, dh,
         inv_sqrt](TensorData& o) {
            std::vector<Real> dP(T * T), dS(T * T);
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t h = 0; h < heads; ++h) {
                    const Real* P = weights.data() + (b * heads + h) * T * T;
                    auto col = [&](std::size_t t) { return (b * T + t) * d + h * dh; };
                    for (std::size_t t = 0; t < T; ++t) {
                        for (std::size_t s = 0; s < T; ++s) {
                            dP[t * T + s] =
                                simd::dot(o.grad.data() + col(t), vi->value.data() + col(s), dh);
                        }
                    }
                    if (vi->requires_grad) {
                        auto gv = vi->ensure_grad();
                        for (std::size_t t = 0; t < T; ++t) {
                            for (std::size_t s = 0; s < T; ++s) {
                                simd::axpy(P[t * T + s], o.grad.data() + col(t),
                                           gv.data() + col(s), dh);
                            }
                        }
                    }
                    for (std::size_t t = 0; t < T; ++t) {
                        Real dot = 0;
                        for (std::size_t s = 0; s < T; ++s) dot += dP[t * T + s] * P[t * T + s];
                        for (std::size_t s = 0; s < T; ++s) {
                            dS[t * T + s] = P[t * T + s] * (dP[t * T + s] - dot) * inv_sqrt;
                        }
                    }
                    if (qi->requires_grad) {
                        auto gq = qi->ensure_grad();
                        for (std::size_t t = 0; t < T; ++t) {
                            for (std::size_t s = 0; s < T; ++s) {
                                simd::axpy(dS[t * T + s], ki->value.data() + col(s),
                                           gq.data() + col(t), dh);
                            }
                        }
                    }
                    if (ki->requires_grad) {
                        auto gk = ki->ensure_grad();
                        for (std::size_t t = 0; t < T; ++t) {
                            for (std::size_t s = 0; s < T; ++s) {
                                simd::axpy(dS[t * T + s], qi->value.data() + col(t),
                                           gk.data() + col(s), dh);
                            }
                        }
                    }
                }
            }
        });
}

Tensor row_norms(const Tensor& x) {
    if (x.rank() != 2) throw ShapeError("row_norms expects [M, D]");
    const std::size_t m = x.dim(0), n = x.dim(1);
    std::vector<Real> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = std::sqrt(simd::dot(x.ptr() + i * n, x.ptr() + i * n, n));
    }
    auto xi = x.impl();
    return finish_op("row_norms", Shape{m}, std::move(out), {&x}, [xi, m, n](TensorData& o) {
        if (!xi->requires_grad) return;
        auto g = xi->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
            if (o.value[i] == 0) continue;  // subgradient 0 at the origin
            simd::axpy(o.grad[i] / o.value[i], xi->value.data() + i * n, g.data() + i * n, n);
        }
    });
}

Tensor l2_normalize_rows(const Tensor& x) {
    if (x.rank() != 2) throw ShapeError("l2_normalize_rows expects [M, D]");
    const std::size_t m = x.dim(0), n = x.dim(1);
    std::vector<Real> norms(m);
    std::vector<Real> out(x.numel());
    for (std::size_t i = 0; i < m; ++i) {
        norms[i] = std::sqrt(simd::dot(x.ptr() + i * n, x.ptr() + i * n, n));
        if (!(norms[i] > 0)) throw ValueError("cannot normalize a zero-norm row");
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[i * n + j] / norms[i];
    }
    auto xi = x.impl();
    return finish_op("l2_normalize_rows", x.shape(), std::move(out), {&x},
                     [xi, norms = std::move(norms), m, n](TensorData& o) {
                         if (!xi->requires_grad) return;
                         auto g = xi->ensure_grad();
                         for (std::size_t i = 0; i < m; ++i) {
                             const Real* gy = o.grad.data() + i * n;
                             const Real* y = o.value.data() + i * n;
                             const Real proj = simd::dot(gy, y, n);
                             for (std::size_t j = 0; j < n; ++j) {
                                 g[i * n + j] += (gy[j] - y[j] * proj) / norms[i];
                             }
                         }
                     });
}

}  // namespace xcc::inline XCC_PRECISION_NS
