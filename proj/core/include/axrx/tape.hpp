#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "axrx/tensor.hpp"

namespace axrx {

/// Records primitive operations for reverse-mode differentiation.
///
/// Constructing a Tape makes it the active tape of the calling thread until
/// it is destroyed; tapes nest. Operations executed on a thread record onto
/// that thread's active tape only, so independent tasks on different threads
/// never see each other's records.
class Tape {
public:
    // Propagates the output gradient into the inputs captured by the closure.
    using BackwardFn = std::function<void(const Tensor& output)>;

    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active() noexcept;

    void record(Tensor output, BackwardFn backward);

    std::size_t size() const noexcept { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    // Seeds d(loss)/d(loss) = 1 and replays the records in reverse order.
    // Gradients of leaf tensors accumulate across calls; gradients of
    // recorded intermediates are recomputed on every call.
    void backward(const Tensor& loss);

    // Invoked once per replayed record; lets tests observe traversal order.
    void set_visit_hook(std::function<void(std::size_t)> hook) { visit_hook_ = std::move(hook); }

private:
    struct Node {
        Tensor output;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
    Tape* previous_;
    std::function<void(std::size_t)> visit_hook_;
};

/// Backward pass on the calling thread's active tape.
void backward(const Tensor& loss);

}  // namespace axrx
