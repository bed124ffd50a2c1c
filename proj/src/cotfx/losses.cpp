#include "xcc/cotfx/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace xcc::inline XCC_PRECISION_NS {

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ShapeError("cosine_similarity: length mismatch");
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (!(aa > 0) || !(bb > 0)) throw ValueError("cosine_similarity: zero-norm input");
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

ProjectionHeads::ProjectionHeads(std::size_t sfx_dim, std::size_t cotfx_dim, std::size_t proj_dim, RngStream& rng)
    : sfx(sfx_dim, proj_dim, rng, Init::xavier), cotfx(cotfx_dim, proj_dim, rng, Init::xavier) {}

void ProjectionHeads::params(NamedTensors& out, const std::string& prefix) const {
    sfx.params(out, prefix + ".sfx");
    cotfx.params(out, prefix + ".cotfx");
}

Tensor contrastive_global_loss(const Tensor& a, const Tensor& b, const LossConfig& cfg) {
    if (a.rank() != 2 || a.shape() != b.shape()) throw ShapeError("contrastive loss needs two [N, D] batches");
    const std::size_t n = a.dim(0);
    if (n < 2) throw ValueError("contrastive loss needs N >= 2");
    if (!(cfg.tau > 0)) throw ValueError("tau must be positive");
    Tensor z = concat(l2_normalize_rows(a), l2_normalize_rows(b), 0);
    Tensor logits = scale(matmul(z, transpose(z)), static_cast<Real>(1.0 / cfg.tau));
    std::vector<std::size_t> partner(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        partner[i] = i + n;
        partner[i + n] = i;
    }
    const double s = cfg.norm == ContrastiveNorm::anchors ? 1.0 : 2.0 / static_cast<double>(n - 1);
    return nt_xent_from_logits(logits, partner, static_cast<Real>(s));
}

PhiSchedule PhiSchedule::parse(const std::string& text) {
    if (text == "reciprocal") return {};
    if (text.rfind("fixed:", 0) == 0) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(text.substr(6), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size() - 6 || v < 0 || v > 1) {
            throw ValueError("bad phi value in '" + text + "'");
        }
        return {PhiKind::fixed, v};
    }
    throw ValueError("phi schedule must be 'reciprocal' or 'fixed:<v>', got '" + text + "'");
}

std::string PhiSchedule::str() const {
    if (kind == PhiKind::reciprocal) return "reciprocal";
    char buf[64];
    std::snprintf(buf, sizeof buf, "fixed:%.17g", value);
    return buf;
}

double phi_schedule(long epoch, const PhiSchedule& schedule) {
    if (epoch < 1) throw ValueError("epoch must be >= 1");
    return schedule.kind == PhiKind::reciprocal ? 1.0 / static_cast<double>(epoch) : schedule.value;
}

Tensor combined_loss(const Tensor& global, const Tensor& ce, double phi) {
    if (!(phi >= 0 && phi <= 1)) throw ValueError("phi must lie in [0, 1]");
    return add(scale(global, static_cast<Real>(phi)), scale(ce, static_cast<Real>(1 - phi)));
}

}  // namespace xcc::inline XCC_PRECISION_NS
