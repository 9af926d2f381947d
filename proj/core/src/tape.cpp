#include "axrx/tape.hpp"

#include <stdexcept>

namespace axrx {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() noexcept { return g_active_tape; }

void Tape::record(Tensor output, BackwardFn backward) {
    nodes_.push_back(Node{std::move(output), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined()) throw std::invalid_argument("backward: undefined loss tensor");
    if (loss.numel() != 1)
        throw std::invalid_argument("backward: loss must be a scalar, got shape " + shape_str(loss.shape()));

    std::size_t produced_at = nodes_.size();
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        if (nodes_[i].output.id() == loss.id()) {
            produced_at = i;
            break;
        }
    }
    if (produced_at == nodes_.size())
        throw std::logic_error("backward: loss was not produced under this tape");

    for (auto& node : nodes_) {
        if (node.output.has_grad()) node.output.zero_grad();
    }
    Tensor seed = loss;
    seed.mutable_grad()[0] = 1.0;

    for (std::size_t i = produced_at + 1; i-- > 0;) {
        auto& node = nodes_[i];
        if (visit_hook_) visit_hook_(i);
        if (!node.output.has_grad()) continue;
        node.backward(node.output);
    }
}

void backward(const Tensor& loss) {
    Tape* tape = Tape::active();
    if (tape == nullptr) throw std::logic_error("backward: no active tape on this thread");
    tape->backward(loss);
}

}  // namespace axrx
