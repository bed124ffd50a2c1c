#pragma once

#include <functional>
#include <string>

#include "xcc/tensor/layers.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct GradCheckOptions {
    double step = 1e-4;
    double rel_tol = 1e-4;
    double abs_floor = 1e-6;
    /// Entries probed per tensor; 0 probes every entry.
    std::size_t max_entries = 0;
    std::uint64_t seed = 7;
};

struct GradCheckResult {
    bool ok = true;
    double max_rel_error = 0;  // over entries whose absolute error exceeds the floor
    double max_abs_error = 0;
    std::size_t checked = 0;
    std::string worst;  // "name[index]" of the worst entry
};

/// Compares tape gradients of `loss` against central differences for the
/// given tensors. `loss` must be a deterministic function of the tensors'
/// current values; it is re-evaluated without a tape for the numeric side.
GradCheckResult grad_check(const std::function<Tensor()>& loss, const NamedTensors& wrt,
                           const GradCheckOptions& opts = {});

}  // namespace xcc::inline XCC_PRECISION_NS
