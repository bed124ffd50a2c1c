#include <algorithm>

#include "xcc/simd/kernels.hpp"
#include "xcc/tensor/ops.hpp"

namespace xcc::inline XCC_PRECISION_NS {

using detail::finish_op;

namespace {

// outer x axis x inner decomposition of a shape around `axis`.
struct AxisSplit {
    std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
    r.len = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
    return r;
}

}  // namespace

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw ShapeError("reshape " + shape_str(x.shape()) + " -> " + shape_str(shape));
    }
    std::vector<Real> out(x.data().begin(), x.data().end());
    auto xi = x.impl();
    return finish_op("reshape", std::move(shape), std::move(out), {&x}, [xi](TensorData& o) {
        if (!xi->requires_grad) return;
        auto g = xi->ensure_grad();
        simd::axpy(Real(1), o.grad.data(), g.data(), g.size());
    });
}

Tensor flatten(const Tensor& x) { return reshape(x, Shape{x.numel()}); }

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis) {
    if (a.rank() != b.rank() || axis >= a.rank()) throw ShapeError("concat: rank mismatch or bad axis");
    for (std::size_t i = 0; i < a.rank(); ++i) {
        if (i != axis && a.dim(i) != b.dim(i)) {
            throw ShapeError("concat: off-axis mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
        }
    }
    const AxisSplit sa = split_at(a.shape(), axis), sb = split_at(b.shape(), axis);
    const std::size_t ra = sa.len * sa.inner, rb = sb.len * sb.inner;
    std::vector<Real> out(a.numel() + b.numel());
    for (std::size_t o = 0; o < sa.outer; ++o) {
        std::copy_n(a.ptr() + o * ra, ra, out.data() + o * (ra + rb));
        std::copy_n(b.ptr() + o * rb, rb, out.data() + o * (ra + rb) + ra);
    }
    Shape shape = a.shape();
    shape[axis] += b.dim(axis);
    auto ai = a.impl(), bi = b.impl();
    const std::size_t outer = sa.outer;
    return finish_op("concat", std::move(shape), std::move(out), {&a, &b},
                     [ai, bi, outer, ra, rb](TensorData& o) {
                         for (std::size_t k = 0; k < outer; ++k) {
                             const Real* g = o.grad.data() + k * (ra + rb);
                             if (ai->requires_grad) {
                                 simd::axpy(Real(1), g, ai->ensure_grad().data() + k * ra, ra);
                             }
                             if (bi->requires_grad) {
                                 simd::axpy(Real(1), g + ra, bi->ensure_grad().data() + k * rb, rb);
                             }
                         }
                     });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
    if (axis >= x.rank() || begin >= end || end > x.dim(axis)) {
        throw ShapeError("slice out of range on " + shape_str(x.shape()));
    }
    const AxisSplit s = split_at(x.shape(), axis);
    const std::size_t row_in = s.len * s.inner, row_out = (end - begin) * s.inner;
    std::vector<Real> out(s.outer * row_out);
    for (std::size_t o = 0; o < s.outer; ++o) {
        std::copy_n(x.ptr() + o * row_in + begin * s.inner, row_out, out.data() + o * row_out);
    }
    Shape shape = x.shape();
    shape[axis] = end - begin;
    auto xi = x.impl();
    const std::size_t outer = s.outer, offset = begin * s.inner;
    return finish_op("slice", std::move(shape), std::move(out), {&x},
                     [xi, outer, row_in, row_out, offset](TensorData& o) {
                         if (!xi->requires_grad) return;
                         auto g = xi->ensure_grad();
                         for (std::size_t k = 0; k < outer; ++k) {
                             simd::axpy(Real(1), o.grad.data() + k * row_out,
                                        g.data() + k * row_in + offset, row_out);
                         }
                     });
}

Tensor patchify(const Tensor& images, std::size_t ps) {
    if (images.rank() != 4 || images.dim(1) != 1) throw ShapeError("patchify expects [N, 1, H, W]");
    const std::size_t N = images.dim(0), H = images.dim(2), W = images.dim(3);
    if (ps == 0 || H % ps != 0 || W % ps != 0) {
        throw ShapeError("image " + std::to_string(H) + "x" + std::to_string(W) +
                         " is not divisible by patch size " + std::to_string(ps));
    }
    const std::size_t ph = H / ps, pw = W / ps, T = ph * pw, D = ps * ps;
    // index[k] = source offset of output element k
    std::vector<std::size_t> index(N * T * D);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t pi = 0; pi < ph; ++pi) {
            for (std::size_t pj = 0; pj < pw; ++pj) {
                const std::size_t t = pi * pw + pj;
                for (std::size_t r = 0; r < ps; ++r) {
                    for (std::size_t c = 0; c < ps; ++c) {
                        index[(n * T + t) * D + r * ps + c] =
                            n * H * W + (pi * ps + r) * W + pj * ps + c;
                    }
                }
            }
        }
    }
    std::vector<Real> out(index.size());
    for (std::size_t k = 0; k < index.size(); ++k) out[k] = images[index[k]];
    auto xi = images.impl();
    return finish_op("patchify", Shape{N * T, D}, std::move(out), {&images},
                     [xi, index = std::move(index)](TensorData& o) {
                         if (!xi->requires_grad) return;
                         auto g = xi->ensure_grad();
                         for (std::size_t k = 0; k < index.size(); ++k) g[index[k]] += o.grad[k];
                     });
}

Tensor mean_tokens(const Tensor& x, std::size_t batch) {
    if (x.rank() != 2 || batch == 0 || x.dim(0) % batch != 0) {
        throw ShapeError("mean_tokens expects [B*T, d] with T integral");
    }
    const std::size_t T = x.dim(0) / batch, d = x.dim(1);
    const Real inv = Real(1) / static_cast<Real>(T);
    std::vector<Real> out(batch * d, Real(0));
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < T; ++t) simd::axpy(inv, x.ptr() + (b * T + t) * d, out.data() + b * d, d);
    }
    auto xi = x.impl();
    return finish_op("mean_tokens", Shape{batch, d}, std::move(out), {&x},
                     [xi, batch, T, d, inv](TensorData& o) {
                         if (!xi->requires_grad) return;
                         auto g = xi->ensure_grad();
                         for (std::size_t b = 0; b < batch; ++b) {
                             for (std::size_t t = 0; t < T; ++t) {
                                 simd::axpy(inv, o.grad.data() + b * d, g.data() + (b * T + t) * d, d);
                             }
                         }
                     });
}

}  // namespace xcc::inline XCC_PRECISION_NS
