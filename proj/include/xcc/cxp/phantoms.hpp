#pragma once

// Synthetic images with known ground truth: lung-field phantoms for the
// segmentator, clean/bone-overlay pairs for the rib suppressor, and the
// blob / blob+opacity classification corpus.

#include <optional>

#include "xcc/cxp/image.hpp"
#include "xcc/tensor/rng.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct LungPhantom {
    GrayImage image;
    BinaryMask mask;  // 1 inside either lung ellipse
};

/// Two dark elliptical fields on a brighter body with noise; centres,
/// axes and intensities jittered per draw.
LungPhantom make_lung_phantom(std::size_t size, RngStream& rng);

struct RibPair {
    GrayImage clean;   // smooth soft-tissue background
    GrayImage ribbed;  // clean plus bright curved bands
};

RibPair make_rib_pair(std::size_t size, RngStream& rng);

/// Axis-aligned box, rows [row, row + height), cols [col, col + width).
struct PatchBox {
    std::size_t row = 0, col = 0, height = 0, width = 0;
    bool contains(std::size_t r, std::size_t c) const {
        return r >= row && r < row + height && c >= col && c < col + width;
    }
};

struct BlobSpec {
    std::size_t size = 64;
    double noise = 0.03;
};

struct BlobSample {
    GrayImage image;
    int label = 0;
    std::optional<PatchBox> box;  // set for label 1
    GrayImage base;               // the image before the patch was planted
};

/// Class 0: soft blob on a near-black background. Class 1: the same kind of
/// image with a bright opacity patch planted fully inside the frame.
BlobSample make_blob_sample(const BlobSpec& spec, int label, RngStream& rng);

}  // namespace xcc::inline XCC_PRECISION_NS
