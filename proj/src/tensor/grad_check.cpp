#include "xcc/tensor/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xcc::inline XCC_PRECISION_NS {

GradCheckResult grad_check(const std::function<Tensor()>& loss, const NamedTensors& wrt,
                           const GradCheckOptions& opts) {
    std::vector<std::vector<Real>> analytic;
    {
        Tape tape;
        TapeScope scope(tape);
        for (const auto& [name, t] : wrt) {
            Tensor h = t;
            h.set_requires_grad(true);
            h.zero_grad();
        }
        Tensor l = loss();
        tape.backward(l);
        for (const auto& [name, t] : wrt) {
            Tensor h = t;
            analytic.emplace_back(h.grad().begin(), h.grad().end());
        }
    }

    GradCheckResult r;
    RngStream rng(opts.seed);
    NoGradScope no_grad;
    for (std::size_t p = 0; p < wrt.size(); ++p) {
        Tensor t = wrt[p].second;
        std::vector<std::size_t> idx(t.numel());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (opts.max_entries != 0 && idx.size() > opts.max_entries) {
            // partial Fisher-Yates for a seeded subset
            for (std::size_t i = 0; i < opts.max_entries; ++i) {
                std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
            }
            idx.resize(opts.max_entries);
        }
        for (std::size_t i : idx) {
            const Real saved = t[i];
            t[i] = saved + static_cast<Real>(opts.step);
            const double up = loss().item();
            t[i] = saved - static_cast<Real>(opts.step);
            const double down = loss().item();
            t[i] = saved;
            const double numeric = (up - down) / (2 * opts.step);
            const double a = analytic[p][i];
            const double abs_err = std::abs(a - numeric);
            const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), 1e-300});
            ++r.checked;
            r.max_abs_error = std::max(r.max_abs_error, abs_err);
            if (abs_err > opts.abs_floor && rel_err > r.max_rel_error) {
                r.max_rel_error = rel_err;
                r.worst = wrt[p].first + "[" + std::to_string(i) + "]";
            }
            if (abs_err > opts.abs_floor && rel_err > opts.rel_tol) r.ok = false;
        }
    }
    return r;
}

}  // namespace xcc::inline XCC_PRECISION_NS
