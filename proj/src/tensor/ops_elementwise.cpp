#include <algorithm>
#include <cmath>

#include "xcc/simd/kernels.hpp"
#include "xcc/tensor/ops.hpp"

namespace xcc::inline XCC_PRECISION_NS {

using detail::finish_op;

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
}

// Accumulates scale * g into the gradient of `dst` when it is tracked.
void accumulate(TensorData& dst, std::span<const Real> g, Real scale_by = Real(1)) {
    if (!dst.requires_grad) return;
    auto gd = dst.ensure_grad();
    simd::axpy(scale_by, g.data(), gd.data(), g.size());
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<Real> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    auto ai = a.impl(), bi = b.impl();
    return finish_op("add", a.shape(), std::move(out), {&a, &b}, [ai, bi](TensorData& o) {
        accumulate(*ai, o.grad);
        accumulate(*bi, o.grad);
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<Real> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    auto ai = a.impl(), bi = b.impl();
    return finish_op("sub", a.shape(), std::move(out), {&a, &b}, [ai, bi](TensorData& o) {
        accumulate(*ai, o.grad);
        accumulate(*bi, o.grad, Real(-1));
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<Real> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    auto ai = a.impl(), bi = b.impl();
    return finish_op("mul", a.shape(), std::move(out), {&a, &b}, [ai, bi](TensorData& o) {
        if (ai->requires_grad) {
            auto g = ai->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * bi->value[i];
        }
        if (bi->requires_grad) {
            auto g = bi->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * ai->value[i];
        }
    });
}

Tensor scale(const Tensor& x, Real s) {
    std::vector<Real> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * s;
    auto xi = x.impl();
    return finish_op("scale", x.shape(), std::move(out), {&x},
                     [xi, s](TensorData& o) { accumulate(*xi, o.grad, s); });
}

Tensor add_scalar(const Tensor& x, Real s) {
    std::vector<Real> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + s;
    auto xi = x.impl();
    return finish_op("add_scalar", x.shape(), std::move(out), {&x},
                     [xi](TensorData& o) { accumulate(*xi, o.grad); });
}

Tensor square(const Tensor& x) {
    std::vector<Real> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * x[i];
    auto xi = x.impl();
    return finish_op("square", x.shape(), std::move(out), {&x}, [xi](TensorData& o) {
        if (!xi->requires_grad) return;
        auto g = xi->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += Real(2) * xi->value[i] * o.grad[i];
    });
}

Tensor pointwise(const Tensor& x, Activation kind) {
    constexpr Real kLeak = Real(0.2);
    std::vector<Real> out(x.numel());
    switch (kind) {
        case Activation::relu:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0 ? x[i] : Real(0);
            break;
        case Activation::leaky_relu:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0 ? x[i] : kLeak * x[i];
            break;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < out.size(); ++i) {
                // Branches keep exp() from overflowing.
                const Real v = x[i];
                if (v >= 0) {
                    out[i] = Real(1) / (Real(1) + std::exp(-v));
                } else {
                    const Real e = std::exp(v);
                    out[i] = e / (Real(1) + e);
                }
            }
            break;
        case Activation::tanh:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x[i]);
            break;
    }
    auto xi = x.impl();
    return finish_op("pointwise", x.shape(), std::move(out), {&x}, [xi, kind](TensorData& o) {
        if (!xi->requires_grad) return;
        auto g = xi->ensure_grad();
        const auto& in = xi->value;
        const auto& y = o.value;
        for (std::size_t i = 0; i < g.size(); ++i) {
            Real d = 0;
            switch (kind) {
                case Activation::relu: d = in[i] > 0 ? Real(1) : Real(0); break;
                case Activation::leaky_relu: d = in[i] > 0 ? Real(1) : kLeak; break;
                case Activation::sigmoid: d = y[i] * (Real(1) - y[i]); break;
                case Activation::tanh: d = Real(1) - y[i] * y[i]; break;
            }
            g[i] += d * o.grad[i];
        }
    });
}

Tensor dropout(const Tensor& x, Real rate, RngStream& rng, Mode mode) {
    if (!(rate >= 0) || rate >= 1) throw ValueError("dropout rate must be in [0, 1)");
    if (mode == Mode::eval || rate == 0) {
        // Identity, still recorded so gradients flow through the same handle.
        std::vector<Real> out(x.data().begin(), x.data().end());
        auto xi = x.impl();
        return finish_op("dropout", x.shape(), std::move(out), {&x},
                         [xi](TensorData& o) { accumulate(*xi, o.grad); });
    }
    const Real keep_scale = Real(1) / (Real(1) - rate);
    std::vector<Real> mask(x.numel());
    for (auto& m : mask) m = rng.uniform() < static_cast<double>(rate) ? Real(0) : keep_scale;
    std::vector<Real> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * mask[i];
    auto xi = x.impl();
    return finish_op("dropout", x.shape(), std::move(out), {&x},
                     [xi, mask = std::move(mask)](TensorData& o) {
                         if (!xi->requires_grad) return;
                         auto g = xi->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * mask[i];
                     });
}

Tensor sum(const Tensor& x) {
    Real s = 0;
    for (Real v : x.data()) s += v;
    auto xi = x.impl();
    return finish_op("sum", Shape{1}, {s}, {&x}, [xi](TensorData& o) {
        if (!xi->requires_grad) return;
        auto g = xi->ensure_grad();
        for (auto& v : g) v += o.grad[0];
    });
}

Tensor mean(const Tensor& x) {
    Real s = 0;
    for (Real v : x.data()) s += v;
    const Real inv = Real(1) / static_cast<Real>(x.numel());
    auto xi = x.impl();
    return finish_op("mean", Shape{1}, {s * inv}, {&x}, [xi, inv](TensorData& o) {
        if (!xi->requires_grad) return;
        auto g = xi->ensure_grad();
        for (auto& v : g) v += o.grad[0] * inv;
    });
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
    if (x.rank() != 2 || b.numel() != x.dim(1)) {
        throw ShapeError("add_bias: x " + shape_str(x.shape()) + " with bias " + shape_str(b.shape()));
    }
    const std::size_t rows = x.dim(0), cols = x.dim(1);
    std::vector<Real> out(x.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = x[r * cols + c] + b[c];
    }
    auto xi = x.impl(), bi = b.impl();
    return finish_op("add_bias", x.shape(), std::move(out), {&x, &b},
                     [xi, bi, rows, cols](TensorData& o) {
                         accumulate(*xi, o.grad);
                         if (bi->requires_grad) {
                             auto g = bi->ensure_grad();
                             for (std::size_t r = 0; r < rows; ++r) {
                                 simd::axpy(Real(1), o.grad.data() + r * cols, g.data(), cols);
                             }
                         }
                     });
}

Tensor add_rows_tiled(const Tensor& x, const Tensor& table) {
    if (x.rank() != 2 || table.rank() != 2 || x.dim(1) != table.dim(1) ||
        x.dim(0) % table.dim(0) != 0) {
        throw ShapeError("add_rows_tiled: x " + shape_str(x.shape()) + " with table " +
                         shape_str(table.shape()));
    }
    const std::size_t block = table.numel();
    const std::size_t blocks = x.numel() / block;
    std::vector<Real> out(x.data().begin(), x.data().end());
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t i = 0; i < block; ++i) out[b * block + i] += table[i];
    }
    auto xi = x.impl(), ti = table.impl();
    return finish_op("add_rows_tiled", x.shape(), std::move(out), {&x, &table},
                     [xi, ti, block, blocks](TensorData& o) {
                         accumulate(*xi, o.grad);
                         if (ti->requires_grad) {
                             auto g = ti->ensure_grad();
                             for (std::size_t b = 0; b < blocks; ++b) {
                                 simd::axpy(Real(1), o.grad.data() + b * block, g.data(), block);
                             }
                         }
                     });
}

}  // namespace xcc::inline XCC_PRECISION_NS
