#include "xcc/tensor/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xcc::inline XCC_PRECISION_NS {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i != 0) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::span<Real> TensorData::ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), Real(0));
    return grad;
}

Tensor::Tensor() : impl_(std::make_shared<TensorData>()) {}

Tensor::Tensor(Shape shape, Real fill) : impl_(std::make_shared<TensorData>()) {
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive: " + shape_str(shape));
    }
    impl_->value.assign(shape_numel(shape), fill);
    impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<Real> values) : impl_(std::make_shared<TensorData>()) {
    if (shape_numel(shape) != values.size()) {
        throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                         shape_str(shape));
    }
    impl_->shape = std::move(shape);
    impl_->value = std::move(values);
}

Tensor Tensor::from(Shape shape, std::initializer_list<Real> values) {
    return Tensor(std::move(shape), std::vector<Real>(values));
}

Real Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
    return impl_->value[0];
}

void Tensor::zero_grad() {
    impl_->grad.assign(impl_->value.size(), Real(0));
}

Tensor& Tensor::set_requires_grad(bool on) {
    impl_->requires_grad = on;
    return *this;
}

Tensor Tensor::clone() const { return Tensor(impl_->shape, impl_->value); }

bool Tensor::all_finite() const {
    return std::all_of(impl_->value.begin(), impl_->value.end(),
                       [](Real v) { return std::isfinite(v); });
}

}  // namespace xcc::inline XCC_PRECISION_NS
