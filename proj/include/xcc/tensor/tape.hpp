#pragma once

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "xcc/tensor/tensor.hpp"

namespace xcc::inline XCC_PRECISION_NS {

/// Append-only record of differentiable operations.
///
/// Operations record a node only while a tape is active on the calling
/// thread (see TapeScope) and at least one input requires a gradient.
/// backward() visits nodes in strictly decreasing append index, so every
/// node's output gradient is complete (summed over all consumers) before
/// its own backward function runs.
class Tape {
 public:
    struct Node {
        std::string_view op;
        std::vector<std::shared_ptr<TensorData>> inputs;
        std::shared_ptr<TensorData> output;
        std::function<void(TensorData& out)> backward;
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    int record(std::string_view op, std::vector<std::shared_ptr<TensorData>> inputs,
               std::shared_ptr<TensorData> output,
               std::function<void(TensorData& out)> backward);

    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::size_t i) const { return nodes_.at(i); }

    /// Reverse sweep from a one-element loss. Throws ShapeError for a
    /// non-scalar loss and NumericError (with the node id) when a NaN or
    /// Inf gradient is produced.
    void backward(const Tensor& loss);

    /// Drops all nodes (and the intermediate storage they keep alive).
    void clear();

 private:
    std::vector<Node> nodes_;
};

/// Tape active on this thread, or nullptr.
Tape* active_tape();

/// Activates a tape for the enclosing scope; restores the previous one on exit.
class TapeScope {
 public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

 private:
    Tape* previous_;
};

/// Disables recording for the enclosing scope.
class NoGradScope {
 public:
    NoGradScope();
    ~NoGradScope();
    NoGradScope(const NoGradScope&) = delete;
    NoGradScope& operator=(const NoGradScope&) = delete;

 private:
    Tape* previous_;
};

namespace detail {

/// True if an op with these inputs must be recorded.
bool needs_record(std::initializer_list<const Tensor*> inputs);

/// Builds the output tensor and records `backward` when required. The
/// backward closure receives the output storage and reads its gradient.
Tensor finish_op(std::string_view op, Shape shape, std::vector<Real> values,
                 std::initializer_list<const Tensor*> inputs,
                 std::function<void(TensorData& out)> backward);

}  // namespace detail

}  // namespace xcc::inline XCC_PRECISION_NS
