#include <algorithm>
#include <cmath>
#include <limits>

#include "xcc/tensor/ops.hpp"

namespace xcc::inline XCC_PRECISION_NS {

using detail::finish_op;

Tensor bce_loss(const Tensor& p, const Tensor& y) {
    if (p.numel() != y.numel()) {
        throw ShapeError("bce_loss: " + shape_str(p.shape()) + " vs labels " + shape_str(y.shape()));
    }
    const std::size_t n = p.numel();
    const Real lo = kProbEps, hi = Real(1) - kProbEps;
    Real total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Real pc = std::clamp(p[i], lo, hi);
        total += y[i] * std::log(pc) + (Real(1) - y[i]) * std::log(Real(1) - pc);
    }
    const Real inv_n = Real(1) / static_cast<Real>(n);
    auto pi = p.impl(), yi = y.impl();
    return finish_op("bce_loss", Shape{1}, {-total * inv_n}, {&p},
                     [pi, yi, lo, hi, inv_n](TensorData& o) {
                         if (!pi->requires_grad) return;
                         auto g = pi->ensure_grad();
                         const Real up = o.grad[0] * inv_n;
                         for (std::size_t i = 0; i < g.size(); ++i) {
                             const Real pv = pi->value[i];
                             if (pv < lo || pv > hi) continue;  // clamped: flat
                             const Real yv = yi->value[i];
                             g[i] -= up * (yv / pv - (Real(1) - yv) / (Real(1) - pv));
                         }
                     });
}

Tensor nt_xent_from_logits(const Tensor& logits, const std::vector<std::size_t>& partner, Real scale_by) {
    if (logits.rank() != 2 || logits.dim(0) != logits.dim(1)) throw ShapeError("nt_xent expects a square logit matrix");
    const std::size_t M = logits.dim(0);
    if (M < 2 || partner.size() != M) throw ShapeError("nt_xent: partner list must cover every anchor");
    for (std::size_t a = 0; a < M; ++a) {
        if (partner[a] >= M || partner[a] == a) throw ValueError("nt_xent: invalid partner index");
    }
    // softmax over k != a, kept for backward
    std::vector<Real> prob(M * M, Real(0));
    Real total = 0;
    for (std::size_t a = 0; a < M; ++a) {
        const Real* row = logits.ptr() + a * M;
        Real mx = -std::numeric_limits<Real>::infinity();
        for (std::size_t k = 0; k < M; ++k) {
            if (k != a) mx = std::max(mx, row[k]);
        }
        Real s = 0;
        for (std::size_t k = 0; k < M; ++k) {
            if (k == a) continue;
            prob[a * M + k] = std::exp(row[k] - mx);
            s += prob[a * M + k];
        }
        for (std::size_t k = 0; k < M; ++k) prob[a * M + k] /= s;
        total += mx + std::log(s) - row[partner[a]];
    }
    const Real factor = scale_by / static_cast<Real>(M);
    auto li = logits.impl();
    return finish_op("nt_xent", Shape{1}, {total * factor}, {&logits},
                     [li, prob = std::move(prob), partner, M, factor](TensorData& o) {
                         if (!li->requires_grad) return;
                         auto g = li->ensure_grad();
                         const Real up = o.grad[0] * factor;
                         for (std::size_t a = 0; a < M; ++a) {
                             for (std::size_t k = 0; k < M; ++k) g[a * M + k] += up * prob[a * M + k];
                             g[a * M + partner[a]] -= up;
                         }
                     });
}

}  // namespace xcc::inline XCC_PRECISION_NS
