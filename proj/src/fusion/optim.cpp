#include "xcc/fusion/optim.hpp"

#include <cmath>
#include <limits>

namespace xcc::inline XCC_PRECISION_NS {

Adam::Adam(NamedTensors params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg), lr_(cfg.lr) {
    for (const auto& [name, t] : params_) {
        m_.emplace_back(t.numel(), 0.0);
        v_.emplace_back(t.numel(), 0.0);
    }
}

void Adam::zero_grad() {
    for (auto& [name, t] : params_) {
        Tensor h = t;
        h.zero_grad();
    }
}

void Adam::step() {
    ++t_;
    const double c1 = 1 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params_.size(); ++p) {
        Tensor t = params_[p].second;
        const bool has = t.has_grad();
        auto& m = m_[p];
        auto& v = v_[p];
        for (std::size_t i = 0; i < t.numel(); ++i) {
            const double theta = t[i];
            double g = has ? static_cast<double>(t.impl()->grad[i]) : 0.0;
            const double sgn = theta > 0 ? 1.0 : (theta < 0 ? -1.0 : 0.0);
            g += cfg_.l2 * theta + cfg_.l1 * sgn;
            m[i] = cfg_.beta1 * m[i] + (1 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1 - cfg_.beta2) * g * g;
            const double mh = m[i] / c1, vh = v[i] / c2;
            t[i] = static_cast<Real>(theta - lr_ * mh / (std::sqrt(vh) + cfg_.eps));
        }
    }
}

NamedTensors Adam::state() const {
    NamedTensors out;
    for (std::size_t p = 0; p < params_.size(); ++p) {
        const Shape& shape = params_[p].second.shape();
        out.emplace_back(params_[p].first + ".m", Tensor(shape, std::vector<Real>(m_[p].begin(), m_[p].end())));
        out.emplace_back(params_[p].first + ".v", Tensor(shape, std::vector<Real>(v_[p].begin(), v_[p].end())));
    }
    out.emplace_back("adam.t", Tensor::scalar(static_cast<Real>(t_)));
    out.emplace_back("adam.lr", Tensor::scalar(static_cast<Real>(lr_)));
    return out;
}

void Adam::load_state(const NamedTensors& state) {
    auto find = [&](const std::string& name) -> const Tensor& {
        for (const auto& [n, t] : state) {
            if (n == name) return t;
        }
        throw ValueError("optimizer state missing " + name);
    };
    for (std::size_t p = 0; p < params_.size(); ++p) {
        const Tensor& m = find(params_[p].first + ".m");
        const Tensor& v = find(params_[p].first + ".v");
        if (m.numel() != m_[p].size() || v.numel() != v_[p].size()) throw ShapeError("optimizer state shape mismatch");
        m_[p].assign(m.data().begin(), m.data().end());
        v_[p].assign(v.data().begin(), v.data().end());
    }
    t_ = static_cast<long>(std::lround(find("adam.t").item()));
    lr_ = find("adam.lr").item();
}

PlateauScheduler::PlateauScheduler(PlateauConfig cfg)
    : cfg_(cfg), best_(-std::numeric_limits<double>::infinity()) {
    if (!(cfg_.factor > 0 && cfg_.factor < 1)) throw ValueError("plateau factor must be in (0, 1)");
    if (cfg_.cooldown < 0) cfg_.cooldown = static_cast<long>(cfg_.patience);
}

bool PlateauScheduler::observe(double value) {
    if (cooldown_left_ > 0) {
        --cooldown_left_;
        wait_ = 0;
    }
    if (value > best_) {
        best_ = value;
        wait_ = 0;
        return false;
    }
    if (cooldown_left_ > 0) return false;
    if (++wait_ < cfg_.patience) return false;
    multiplier_ *= cfg_.factor;
    ++cuts_;
    cooldown_left_ = cfg_.cooldown;
    wait_ = 0;
    return true;
}

std::vector<std::size_t> plateau_cut_epochs(const std::vector<double>& history, const PlateauConfig& cfg) {
    PlateauScheduler s(cfg);
    std::vector<std::size_t> cuts;
    for (std::size_t e = 0; e < history.size(); ++e) {
        if (s.observe(history[e])) cuts.push_back(e + 1);
    }
    return cuts;
}

double plateau_multiplier(const std::vector<double>& history, const PlateauConfig& cfg) {
    PlateauScheduler s(cfg);
    for (double h : history) s.observe(h);
    return s.multiplier();
}

}  // namespace xcc::inline XCC_PRECISION_NS
