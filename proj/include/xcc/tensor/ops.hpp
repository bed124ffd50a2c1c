#pragma once

// Differentiable tensor operations. Each op computes its forward value
// eagerly and, when a tape is active and an input requires a gradient,
// records a backward closure (see tape.hpp).

#include <cstdint>
#include <vector>

#include "xcc/tensor/rng.hpp"
#include "xcc/tensor/tape.hpp"
#include "xcc/tensor/tensor.hpp"

namespace xcc::inline XCC_PRECISION_NS {

enum class Mode { train, eval };

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, Real s);
Tensor add_scalar(const Tensor& x, Real s);
Tensor square(const Tensor& x);

enum class Activation { relu, sigmoid, tanh, leaky_relu };
/// leaky_relu uses slope 0.2 for negative inputs.
Tensor pointwise(const Tensor& x, Activation kind);
inline Tensor relu(const Tensor& x) { return pointwise(x, Activation::relu); }
inline Tensor sigmoid(const Tensor& x) { return pointwise(x, Activation::sigmoid); }
inline Tensor tanh(const Tensor& x) { return pointwise(x, Activation::tanh); }

/// Inverted dropout: in train mode each element is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate). Identity in eval mode.
Tensor dropout(const Tensor& x, Real rate, RngStream& rng, Mode mode);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// x[M, n] + b[n] broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& b);
/// x[B*T, d] + table[T, d], the table repeated for each of the B blocks.
Tensor add_rows_tiled(const Tensor& x, const Tensor& table);

// ---------------------------------------------------------------- linear algebra

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
/// x[M, in] * w[in, out] + b[out].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

/// Softmax along `axis` with max subtraction.
Tensor softmax(const Tensor& x, std::size_t axis);

/// Scaled dot-product multi-head attention core. q, k, v are [B*T, d] with
/// tokens of one sequence contiguous; head h uses columns [h*d/heads, (h+1)*d/heads).
/// Returns the concatenated head outputs [B*T, d]. When `attention` is
/// non-null it receives the softmax weights laid out [B, heads, T, T].
Tensor multihead_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                           std::size_t batch, std::size_t heads,
                           std::vector<Real>* attention = nullptr);

/// Per-row L2 norms of x[M, D] as [M].
Tensor row_norms(const Tensor& x);
/// Rows of x[M, D] scaled to unit L2 norm. Throws ValueError for a zero row.
Tensor l2_normalize_rows(const Tensor& x);

// ---------------------------------------------------------------- convolution

enum class Padding { same, valid };

struct ConvOptions {
    std::size_t dilation = 1;
    Padding padding = Padding::same;
};

/// Centered cross-correlation with dilated taps:
///   y[o, i, j] = b[o] + sum_{c,m,n} x[c, i + d*m - p, j + d*n - p] * w[o, c, m, n]
/// with zero padding p = d*(k-1)/2 under `same` and p = 0 under `valid`.
/// Accepts [C, H, W] or [N, C, H, W] input; kernel is [C_out, C_in, k, k].
Tensor conv2d(const Tensor& input, const Tensor& kernel, const ConvOptions& opts = {});
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              const ConvOptions& opts = {});

/// Corner-anchored dilated convolution, literal form:
///   y[i, j] = sum_{m,n} x[i - d*m, j - d*n] * f[m, n]
/// with out-of-range samples read as zero; output has the input's size.
/// Single-channel [H, W] input and [k, k] kernel. Not differentiable.
Tensor conv2d_ref_eq12(const Tensor& input, const Tensor& kernel, std::size_t dilation);

/// Multiplies issued by conv2d forward passes on this thread since the last reset.
std::uint64_t conv_multiply_count();
void reset_conv_multiply_count();

/// Stride-2, 2x2 transposed convolution: x[N, C_in, H, W] -> [N, C_out, 2H, 2W],
/// kernel [C_in, C_out, 2, 2].
Tensor conv_transpose2x2(const Tensor& x, const Tensor& kernel, const Tensor& bias);

/// 2x2 max pooling with stride 2 on [..., H, W]. Odd trailing rows/columns
/// are padded with -inf. Gradient goes to the first maximum in row-major
/// window order.
Tensor maxpool2d(const Tensor& x);
/// 2x2 average pooling with stride 2; H and W must be even.
Tensor avgpool2d(const Tensor& x);
/// Nearest-neighbour 2x upsampling on [..., H, W].
Tensor upsample_nearest2x(const Tensor& x);

// ---------------------------------------------------------------- normalization

struct BatchNormState {
    Tensor running_mean;
    Tensor running_var;
    Real momentum = Real(0.1);
    Real eps = Real(1e-5);
};

/// Per-channel batch normalization of x[N, C, ...] (or [N, C]). Train mode
/// uses biased batch statistics and updates the running stats as
/// running = (1 - momentum) * running + momentum * batch (unbiased variance).
/// Eval mode uses the running stats. Train mode needs N >= 2.
Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                 Mode mode);

/// Normalization over the last axis with affine gamma/beta of that length.
Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Real eps = Real(1e-5));

/// Adaptive instance normalization of x[N, C, H, W]:
///   out = sigma[n, c] * (x - mu_x) / max(std_x, eps) + mu[n, c]
/// with population statistics per (n, c).
Tensor adain(const Tensor& x, const Tensor& style_mean, const Tensor& style_std,
             Real eps = Real(1e-5));

// ---------------------------------------------------------------- shape

/// Row-major flatten to 1-D.
Tensor flatten(const Tensor& x);
/// Same data, new shape (copying).
Tensor reshape(const Tensor& x, Shape shape);
Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis);
/// Elements [begin, end) along `axis`.
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
/// Batch of single-channel images [N, 1, H, W] -> patches [N*T, ps*ps], row-major patch order.
Tensor patchify(const Tensor& images, std::size_t patch_size);
/// Mean over axis 1 of x[B, T, d] given as [B*T, d]; returns [B, d].
Tensor mean_tokens(const Tensor& x, std::size_t batch);

// ---------------------------------------------------------------- losses

inline constexpr Real kProbEps = kIsDouble ? Real(1e-12) : Real(1e-7);

/// Mean binary cross-entropy -(1/N) sum[y log p + (1-y) log(1-p)], with p
/// clamped to [eps, 1-eps]. Differentiable in p.
Tensor bce_loss(const Tensor& p, const Tensor& y);

/// NT-Xent from a [M, M] logit matrix (similarity / tau). Anchor a's positive
/// is column partner[a]; the denominator runs over all k != a. Returns the
/// mean over anchors of logsumexp_{k!=a} S[a,k] - S[a, partner[a]], times
/// `scale`.
Tensor nt_xent_from_logits(const Tensor& logits, const std::vector<std::size_t>& partner,
                           Real scale = Real(1));

}  // namespace xcc::inline XCC_PRECISION_NS
