#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "xcc/ada/gan.hpp"

namespace xcc::inline XCC_PRECISION_NS {

enum class Origin { real, synthetic };

const char* origin_name(Origin o);

struct LabeledImage {
    GrayImage image;
    int label = 0;
    Origin origin = Origin::real;
};

/// Produces the i-th synthetic image of a class.
using ImageSampler = std::function<GrayImage(std::size_t index)>;

/// Deterministic sampler over a frozen generator: image i is drawn from
/// RngStream(seed).split(i).
ImageSampler generator_sampler(const Generator& gen, std::uint64_t seed);

/// Real images first (unchanged, in order), then for every class whose
/// real count is below its target, synthetic images until the target is
/// reached. Throws ValueError when a target is below the real count or a
/// deficient class has no sampler.
std::vector<LabeledImage> augment_dataset(const std::map<int, std::vector<GrayImage>>& real_by_class,
                                          const std::map<int, std::size_t>& targets_by_class,
                                          const std::map<int, ImageSampler>& gen_by_class);

/// Per-class (real, synthetic, total) counts.
struct ClassCounts {
    std::size_t real = 0, synthetic = 0, total = 0;
};
std::map<int, ClassCounts> count_by_class(const std::vector<LabeledImage>& data);

}  // namespace xcc::inline XCC_PRECISION_NS
