#pragma once

#include <string>
#include <vector>

#include "xcc/tensor/layers.hpp"

namespace xcc::inline XCC_PRECISION_NS {

/// a.b / (|a| |b|). Throws ValueError for a zero-norm input.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// How the per-anchor NT-Xent terms are averaged.
enum class ContrastiveNorm {
    anchors,        // mean over the 2N anchors
    ordered_pairs,  // sum over anchors / (N (N - 1))
};

struct LossConfig {
    double tau = 0.5;
    ContrastiveNorm norm = ContrastiveNorm::anchors;
};

/// Learned maps of both feature vectors into one shared space.
struct ProjectionHeads {
    Linear sfx, cotfx;

    ProjectionHeads() = default;
    ProjectionHeads(std::size_t sfx_dim, std::size_t cotfx_dim, std::size_t proj_dim, RngStream& rng);
    void params(NamedTensors& out, const std::string& prefix = "proj") const;
};

/// NT-Xent over the 2N views [a_0..a_{N-1}, b_0..b_{N-1}]; the positive of
/// a_i is b_i and vice versa, every other view is a negative. Rows are L2
/// normalized first. Throws ValueError for N < 2 or a zero row.
Tensor contrastive_global_loss(const Tensor& a, const Tensor& b, const LossConfig& cfg);

enum class PhiKind { reciprocal, fixed };

struct PhiSchedule {
    PhiKind kind = PhiKind::reciprocal;
    double value = 1.0;  // for fixed

    /// "reciprocal" or "fixed:<v>".
    static PhiSchedule parse(const std::string& text);
    std::string str() const;
};

/// reciprocal: 1 / epoch; fixed: the constant. Throws ValueError for epoch < 1.
double phi_schedule(long epoch, const PhiSchedule& schedule);

/// phi * global + (1 - phi) * ce. Throws ValueError for phi outside [0, 1].
Tensor combined_loss(const Tensor& global, const Tensor& ce, double phi);

}  // namespace xcc::inline XCC_PRECISION_NS
