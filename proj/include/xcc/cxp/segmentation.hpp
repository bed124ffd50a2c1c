#pragma once

#include <utility>
#include <vector>

#include "xcc/cxp/image.hpp"
#include "xcc/tensor/layers.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct SegConfig {
    std::vector<std::size_t> channels{4, 8, 8, 16};  // one entry per encoder stage
    std::size_t epochs = 25;
    std::size_t batch = 4;
    double lr = 3e-3;
    std::uint64_t seed = 1;
};

/// Residual U-shaped segmentator: one residual block + 2x2 max-pool per
/// encoder stage, a residual bottleneck, and per decoder stage a 2x2
/// transposed conv, concatenation with the matching encoder output and a
/// residual block. Head: 1x1 conv + sigmoid. Input dims must be divisible
/// by 2^stages.
class SegModel {
 public:
    SegModel() = default;
    SegModel(std::vector<std::size_t> channels, RngStream& rng);

    /// [N, 1, H, W] -> lung probabilities [N, 1, H, W].
    Tensor forward(const Tensor& x) const;
    void params(NamedTensors& out, const std::string& prefix = "seg") const;
    const std::vector<std::size_t>& channels() const { return channels_; }
    bool initialized() const { return !channels_.empty(); }

    double final_loss = 0;

 private:
    std::vector<std::size_t> channels_;
    std::vector<ResidualBlock> enc_, dec_;
    ResidualBlock bottleneck_;
    std::vector<Tensor> up_w_, up_b_;
    Conv2d head_;
};

/// Mean pixelwise BCE between predicted probabilities and a ground-truth mask.
Tensor segmentation_loss(const Tensor& probs, const Tensor& target);

struct SegTrainResult {
    SegModel model;
    std::vector<double> epoch_loss;
};

/// Adam on the mean BCE over shuffled mini-batches. Throws ShapeError on
/// mismatched pairs and NumericError on a non-finite loss.
SegTrainResult train_segmentator(const std::vector<std::pair<GrayImage, BinaryMask>>& pairs, const SegConfig& cfg);

/// probabilities >= threshold; an empty result is replaced by an all-ones
/// mask and `fallback` (if given) is set.
BinaryMask threshold_mask(const Tensor& probs, std::size_t h, std::size_t w, double threshold, bool* fallback);
BinaryMask segment_lungs(const GrayImage& img, const SegModel& model, double threshold = 0.5, bool* fallback = nullptr);

/// img AND mask, cropped to the tight bounding box of the 1-pixels.
GrayImage apply_mask_and_crop(const GrayImage& img, const BinaryMask& mask);

double mask_iou(const BinaryMask& a, const BinaryMask& b);
double mask_pixel_accuracy(const BinaryMask& a, const BinaryMask& b);

}  // namespace xcc::inline XCC_PRECISION_NS
