#pragma once

#include <vector>

#include "xcc/cxp/image.hpp"
#include "xcc/cxp/phantoms.hpp"
#include "xcc/tensor/layers.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct RibConfig {
    std::vector<std::size_t> filters{4, 4, 4, 4, 4};  // canonical: 16, 32, 64, 128, 256
    std::size_t pairs = 48;
    std::size_t size = 32;  // training phantom size
    std::size_t epochs = 20;
    std::size_t batch = 4;
    double lr = 3e-3;
    std::uint64_t seed = 2;
};

/// Stacked residual blocks followed by a single-filter 3x3 conv and a
/// sigmoid. Identity initialization zeroes the second conv of every block,
/// so each block starts as relu(skip(x)).
class RibModel {
 public:
    RibModel() = default;
    RibModel(const std::vector<std::size_t>& filters, RngStream& rng, bool identity_init = true);

    /// [N, 1, H, W] -> [N, 1, H, W] in (0, 1).
    Tensor forward(const Tensor& x) const;
    void params(NamedTensors& out, const std::string& prefix = "rib") const;
    bool initialized() const { return !blocks_.empty(); }
    const std::vector<std::size_t>& filters() const { return filters_; }

 private:
    std::vector<std::size_t> filters_;
    std::vector<ResidualBlock> blocks_;
    Conv2d head_;
};

struct RibTrainResult {
    RibModel model;
    std::vector<double> epoch_loss;
};

/// Trains on synthetic clean/ribbed phantom pairs with a mean squared error
/// against the clean image.
RibTrainResult train_rib_suppressor(const RibConfig& cfg);
RibTrainResult train_rib_suppressor(const std::vector<RibPair>& pairs, const RibConfig& cfg);

GrayImage suppress_ribs(const GrayImage& img, const RibModel& model);

/// 1 - ||out - clean||^2 / ||ribbed - clean||^2: the fraction of band
/// energy removed.
double band_energy_removed(const RibPair& pair, const GrayImage& out);

}  // namespace xcc::inline XCC_PRECISION_NS
