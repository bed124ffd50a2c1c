#include "xcc/tensor/layers.hpp"

#include <cmath>

namespace xcc::inline XCC_PRECISION_NS {

Tensor init_param(Shape shape, Init init, std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
    Tensor t(std::move(shape));
    switch (init) {
        case Init::zeros:
            break;
        case Init::he: {
            const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
            for (auto& v : t.data()) v = static_cast<Real>(sd * rng.normal());
            break;
        }
        case Init::xavier: {
            const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (auto& v : t.data()) v = static_cast<Real>(rng.uniform(-lim, lim));
            break;
        }
    }
    t.set_requires_grad(true);
    return t;
}

Linear::Linear(std::size_t in, std::size_t out, RngStream& rng, Init init)
    : weight(init_param({in, out}, init, in, out, rng)),
      bias(init_param({out}, Init::zeros, in, out, rng)) {}

void Linear::params(NamedTensors& out, const std::string& prefix) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
}

Conv2d::Conv2d(std::size_t in, std::size_t out, std::size_t k, RngStream& rng, std::size_t dilation,
               Padding padding)
    : weight(init_param({out, in, k, k}, Init::he, in * k * k, out * k * k, rng)),
      bias(init_param({out}, Init::zeros, 0, 0, rng)),
      options{dilation, padding} {}

void Conv2d::params(NamedTensors& out, const std::string& prefix) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
}

BatchNorm2d::BatchNorm2d(std::size_t channels)
    : gamma(Tensor::ones({channels})), beta(Tensor::zeros({channels})) {
    gamma.set_requires_grad(true);
    beta.set_requires_grad(true);
    state.running_mean = Tensor::zeros({channels});
    state.running_var = Tensor::ones({channels});
}

void BatchNorm2d::params(NamedTensors& out, const std::string& prefix) const {
    out.emplace_back(prefix + ".gamma", gamma);
    out.emplace_back(prefix + ".beta", beta);
}

void BatchNorm2d::buffers(NamedTensors& out, const std::string& prefix) const {
    out.emplace_back(prefix + ".running_mean", state.running_mean);
    out.emplace_back(prefix + ".running_var", state.running_var);
}

LayerNorm::LayerNorm(std::size_t dim) : gamma(Tensor::ones({dim})), beta(Tensor::zeros({dim})) {
    gamma.set_requires_grad(true);
    beta.set_requires_grad(true);
}

void LayerNorm::params(NamedTensors& out, const std::string& prefix) const {
    out.emplace_back(prefix + ".gamma", gamma);
    out.emplace_back(prefix + ".beta", beta);
}

ResidualBlock::ResidualBlock(std::size_t in, std::size_t out, RngStream& rng, bool zero_residual)
    : conv1(in, out, 3, rng), conv2(out, out, 3, rng), has_proj(in != out) {
    if (has_proj) proj = Conv2d(in, out, 1, rng);
    if (zero_residual) {
        for (auto& v : conv2.weight.data()) v = 0;
    }
}

Tensor ResidualBlock::operator()(const Tensor& x) const {
    Tensor skip = has_proj ? proj(x) : x;
    return relu(add(conv2(relu(conv1(x))), skip));
}

void ResidualBlock::params(NamedTensors& out, const std::string& prefix) const {
    conv1.params(out, prefix + ".conv1");
    conv2.params(out, prefix + ".conv2");
    if (has_proj) proj.params(out, prefix + ".proj");
}

double squared_norm(const NamedTensors& tensors) {
    double s = 0;
    for (const auto& [name, t] : tensors) {
        for (Real v : t.data()) s += static_cast<double>(v) * v;
    }
    return s;
}

}  // namespace xcc::inline XCC_PRECISION_NS
