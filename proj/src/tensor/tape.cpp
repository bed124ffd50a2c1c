#include "xcc/tensor/tape.hpp"

#include <cmath>
#include <string>

namespace xcc::inline XCC_PRECISION_NS {

namespace {
thread_local Tape* g_active = nullptr;
}

Tape* active_tape() { return g_active; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active) { g_active = &tape; }
TapeScope::~TapeScope() { g_active = previous_; }

NoGradScope::NoGradScope() : previous_(g_active) { g_active = nullptr; }
NoGradScope::~NoGradScope() { g_active = previous_; }

int Tape::record(std::string_view op, std::vector<std::shared_ptr<TensorData>> inputs,
                 std::shared_ptr<TensorData> output,
                 std::function<void(TensorData& out)> backward) {
    const int id = static_cast<int>(nodes_.size());
    output->node = id;
    nodes_.push_back(Node{op, std::move(inputs), std::move(output), std::move(backward)});
    return id;
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) {
        throw ShapeError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
    }
    if (!std::isfinite(loss.item())) {
        throw NumericError("non-finite loss", loss.node());
    }
    loss.impl()->ensure_grad()[0] += Real(1);
    const int start = loss.node();
    for (int i = start; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        TensorData& out = *n.output;
        if (out.grad.empty()) continue;
        for (Real g : out.grad) {
            if (!std::isfinite(g)) {
                throw NumericError("non-finite gradient at node " + std::to_string(i) + " (" +
                                       std::string(n.op) + ")",
                                   i);
            }
        }
        n.backward(out);
    }
}

void Tape::clear() { nodes_.clear(); }

namespace detail {

bool needs_record(std::initializer_list<const Tensor*> inputs) {
    if (g_active == nullptr) return false;
    for (const Tensor* t : inputs) {
        if (t != nullptr && t->requires_grad()) return true;
    }
    return false;
}

Tensor finish_op(std::string_view op, Shape shape, std::vector<Real> values,
                 std::initializer_list<const Tensor*> inputs,
                 std::function<void(TensorData& out)> backward) {
    for (Real v : values) {
        if (!std::isfinite(v)) {
            throw NumericError("non-finite value produced by " + std::string(op), -1);
        }
    }
    Tensor out(std::move(shape), std::move(values));
    if (needs_record(inputs)) {
        std::vector<std::shared_ptr<TensorData>> in;
        in.reserve(inputs.size());
        for (const Tensor* t : inputs) {
            if (t != nullptr) in.push_back(t->impl());
        }
        out.set_requires_grad(true);
        g_active->record(op, std::move(in), out.impl(), std::move(backward));
    }
    return out;
}

}  // namespace detail

}  // namespace xcc::inline XCC_PRECISION_NS
