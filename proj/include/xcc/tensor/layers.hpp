#pragma once

// Parameterized building blocks on top of ops.hpp. Every layer owns its
// parameter tensors (requires_grad = true) and exposes them by name so that
// optimizers and checkpoints can address them uniformly.

#include <string>
#include <utility>
#include <vector>

#include "xcc/tensor/ops.hpp"

namespace xcc::inline XCC_PRECISION_NS {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

enum class Init { he, xavier, zeros };

/// Parameter tensor drawn from `init` with the given fans.
Tensor init_param(Shape shape, Init init, std::size_t fan_in, std::size_t fan_out, RngStream& rng);

struct Linear {
    Tensor weight;  // [in, out]
    Tensor bias;    // [out]

    Linear() = default;
    Linear(std::size_t in, std::size_t out, RngStream& rng, Init init = Init::he);
    Tensor operator()(const Tensor& x) const { return linear(x, weight, bias); }
    std::size_t in_features() const { return weight.dim(0); }
    std::size_t out_features() const { return weight.dim(1); }
    void params(NamedTensors& out, const std::string& prefix) const;
};

struct Conv2d {
    Tensor weight;  // [out, in, k, k]
    Tensor bias;    // [out]
    ConvOptions options;

    Conv2d() = default;
    Conv2d(std::size_t in, std::size_t out, std::size_t k, RngStream& rng, std::size_t dilation = 1,
           Padding padding = Padding::same);
    Tensor operator()(const Tensor& x) const { return conv2d(x, weight, bias, options); }
    void params(NamedTensors& out, const std::string& prefix) const;
};

struct BatchNorm2d {
    Tensor gamma, beta;
    BatchNormState state;

    BatchNorm2d() = default;
    explicit BatchNorm2d(std::size_t channels);
    Tensor operator()(const Tensor& x, Mode mode) { return batchnorm(x, gamma, beta, state, mode); }
    void params(NamedTensors& out, const std::string& prefix) const;
    /// Running statistics (checkpointed, not optimized).
    void buffers(NamedTensors& out, const std::string& prefix) const;
};

struct LayerNorm {
    Tensor gamma, beta;

    LayerNorm() = default;
    explicit LayerNorm(std::size_t dim);
    Tensor operator()(const Tensor& x) const { return layernorm(x, gamma, beta); }
    void params(NamedTensors& out, const std::string& prefix) const;
};

/// y = relu(conv2(relu(conv1(x))) + skip(x)), 3x3 same-padded convs; skip is
/// the identity when channel counts match and a 1x1 conv otherwise. With
/// `zero_residual` conv2 starts at zero so the block begins as relu(skip(x)).
struct ResidualBlock {
    Conv2d conv1, conv2;
    Conv2d proj;
    bool has_proj = false;

    ResidualBlock() = default;
    ResidualBlock(std::size_t in, std::size_t out, RngStream& rng, bool zero_residual = false);
    Tensor operator()(const Tensor& x) const;
    void params(NamedTensors& out, const std::string& prefix) const;
};

/// Sum of squared parameter values; handy for tests and weight-norm logging.
double squared_norm(const NamedTensors& tensors);

}  // namespace xcc::inline XCC_PRECISION_NS
