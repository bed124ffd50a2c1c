#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xcc/cxp/image.hpp"
#include "xcc/fusion/metrics.hpp"
#include "xcc/fusion/model.hpp"
#include "xcc/fusion/optim.hpp"

namespace xcc::inline XCC_PRECISION_NS {

struct LabeledSet {
    std::vector<GrayImage> images;
    std::vector<int> labels;

    std::size_t size() const { return images.size(); }
    bool empty() const { return images.empty(); }
    /// Images [i0, i1) as [n, 1, H, W].
    Tensor batch(std::size_t i0, std::size_t i1) const;
    Tensor batch(const std::vector<std::size_t>& idx, std::size_t i0, std::size_t i1) const;
};

/// How the two branches share training batches.
enum class BranchSchedule { joint, alternate };

struct TrainConfig {
    double lr = 1e-3;  // canonical: 1e-6
    double plateau_factor = 0.3;
    std::size_t plateau_patience = 2;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double l1 = 1e-6, l2 = 1e-5;
    std::size_t epochs = 12;
    /// Number of the first epoch run; later than 1 when resuming, so the
    /// curves and the phi schedule continue.
    std::size_t first_epoch = 1;
    std::size_t batch = 16;
    std::uint64_t seed = 7;
    double train_frac = 0.8, val_frac = 0.1, test_frac = 0.1;
    PhiSchedule phi;
    LossConfig loss;
    /// Skip the contrastive term entirely (plain cross-entropy classifier).
    bool ce_only = false;
    BranchSchedule schedule = BranchSchedule::joint;
    /// Recompute batch-norm statistics over the training split after each epoch.
    bool recalibrate_bn = true;
    /// Restore the best validation epoch at the end (otherwise keep the last).
    bool restore_best = true;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double phi = 0, lr = 0, l_global = 0, l_ce = 0, l_combined = 0, val_acc = 0;
};

struct TrainResult {
    std::vector<EpochRecord> curve;
    std::size_t best_epoch = 0;
    double best_val_acc = -1;
    NamedTensors best_state;  // deep copies
};

/// Joint training of both branches, the projection heads and the classifier
/// on the combined loss; reduce-on-plateau on validation accuracy. The best
/// epoch (ties to the earlier one) is restored into `net` before returning.
/// Throws ValueError on an empty split and NumericError (naming epoch and
/// batch) on a non-finite loss.
TrainResult train_xccnet(XccNet& net, const LabeledSet& train, const LabeledSet& val, const TrainConfig& cfg);

struct Evaluation {
    Metrics metrics;
    std::vector<double> probs;
};

Evaluation evaluate(XccNet& net, const LabeledSet& data, std::size_t batch = 32);

/// "epoch,phi,lr,L_global,L_ce,L_combined,val_acc" plus one row per epoch.
std::string curves_csv(const std::vector<EpochRecord>& curve);

}  // namespace xcc::inline XCC_PRECISION_NS
