#pragma once

#include <array>
#include <string>
#include <vector>

#include "xcc/cxp/image.hpp"
#include "xcc/fusion/model.hpp"

namespace xcc::inline XCC_PRECISION_NS {

enum class CamMethod { grad_cam, grad_cam_pp, score_cam };

const char* cam_method_name(CamMethod m);
/// "grad-cam", "grad-cam++", "score-cam". Throws ValueError otherwise.
CamMethod parse_cam_method(const std::string& s);

/// Non-negative map at the target layer's spatial size, max-normalized to
/// [0, 1]; an all-zero map stays all-zero.
struct CamMap {
    std::size_t height = 0, width = 0;
    std::vector<double> grid;
    std::size_t layer = 0;
    int target_class = 1;
    CamMethod method = CamMethod::grad_cam;

    double at(std::size_t r, std::size_t c) const { return grid[r * width + c]; }
    /// Row-major index of the first maximum.
    std::size_t argmax() const;
    /// Centre of the argmax cell in image pixel coordinates (row, col).
    std::pair<double, double> argmax_in_image(std::size_t img_h, std::size_t img_w) const;
};

/// Per-channel weights from activations A and gradients G, both [C, h*w].
/// Grad-CAM: spatial mean of G. Grad-CAM++: sum of alpha * ReLU(G) with
/// alpha = G^2 / (2 G^2 + sum(A) G^3), and alpha = 1/2 when
/// `zero_higher_order` drops the third-order term.
std::vector<double> cam_weights(const std::vector<double>& a, const std::vector<double>& g, std::size_t channels,
                                CamMethod method, bool zero_higher_order = false);

/// ReLU(sum_c w_c A_c), max-normalized.
std::vector<double> weighted_map(const std::vector<double>& a, const std::vector<double>& w, std::size_t channels);

/// Class score used by every method: the logit for class 1, its negation for class 0.
Tensor class_score(const Tensor& logits, int cls);

/// `layer` indexes SFx blocks; the map lives on that block's conv
/// activation (ReLU output, before normalization and pooling). The
/// model is used in eval mode and its parameters are left unchanged
/// (gradients included). Throws ValueError for a bad layer or class.
CamMap grad_cam(XccNet& net, const GrayImage& img, std::size_t layer, int cls);
CamMap grad_cam_pp(XccNet& net, const GrayImage& img, std::size_t layer, int cls, bool zero_higher_order = false);
/// Gradient-free: each channel, bicubically upsampled and min-max
/// normalized, masks the input; weights are the softmax over channels of
/// the masked-input class scores. `batch` masked images per forward pass.
CamMap score_cam(XccNet& net, const GrayImage& img, std::size_t layer, int cls, std::size_t batch = 16);
CamMap compute_cam(XccNet& net, const GrayImage& img, CamMethod method, std::size_t layer, int cls);

/// CAM bicubically upsampled to the image size and clamped to [0, 1].
GrayImage upsample_cam(const CamMap& cam, std::size_t h, std::size_t w);

constexpr double kOverlayAlpha = 0.4;

/// Monotone heat colormap, each channel non-decreasing in v.
std::array<double, 3> heat_color(double v);

/// out = (1 - alpha c) gray + alpha c heat(c) per channel, c the upsampled CAM.
RgbImage overlay(const GrayImage& img, const CamMap& cam, double alpha = kOverlayAlpha);

/// JSON sidecar: method, layer, class, map dims, argmax in map and image coordinates.
std::string cam_sidecar_json(const CamMap& cam, std::size_t img_h, std::size_t img_w);

}  // namespace xcc::inline XCC_PRECISION_NS
