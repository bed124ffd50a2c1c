#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xcc/error.hpp"
#include "xcc/precision.hpp"

namespace xcc::inline XCC_PRECISION_NS {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Storage shared between a Tensor handle and the tape nodes that read it.
struct TensorData {
    Shape shape;
    std::vector<Real> value;
    std::vector<Real> grad;  // empty until a gradient is first accumulated
    bool requires_grad = false;
    int node = -1;  // tape index of the producing op; -1 for leaves

    std::span<Real> ensure_grad();
};

/// Dense row-major tensor handle. Copies share storage; use clone() for a
/// deep copy. Layout is channels-first ([N, C, H, W] for image batches).
class Tensor {
 public:
    Tensor();
    explicit Tensor(Shape shape, Real fill = 0);
    Tensor(Shape shape, std::vector<Real> values);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor ones(Shape shape) { return Tensor(std::move(shape), Real(1)); }
    static Tensor scalar(Real v) { return Tensor(Shape{1}, v); }
    static Tensor from(Shape shape, std::initializer_list<Real> values);

    const Shape& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
    std::size_t numel() const { return impl_->value.size(); }

    std::span<Real> data() { return impl_->value; }
    std::span<const Real> data() const { return impl_->value; }
    Real* ptr() { return impl_->value.data(); }
    const Real* ptr() const { return impl_->value.data(); }
    Real& operator[](std::size_t i) { return impl_->value[i]; }
    Real operator[](std::size_t i) const { return impl_->value[i]; }

    /// Value of a one-element tensor.
    Real item() const;

    bool has_grad() const { return !impl_->grad.empty(); }
    /// Gradient buffer, allocated as zeros on first access.
    std::span<Real> grad() { return impl_->ensure_grad(); }
    std::span<const Real> grad() const { return impl_->ensure_grad(); }
    void zero_grad();

    bool requires_grad() const { return impl_->requires_grad; }
    Tensor& set_requires_grad(bool on = true);
    int node() const { return impl_->node; }

    /// Deep copy of the values, detached from any tape.
    Tensor clone() const;

    bool all_finite() const;

    const std::shared_ptr<TensorData>& impl() const { return impl_; }
    explicit Tensor(std::shared_ptr<TensorData> impl) : impl_(std::move(impl)) {}

 private:
    std::shared_ptr<TensorData> impl_;
};

}  // namespace xcc::inline XCC_PRECISION_NS
