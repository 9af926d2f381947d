#pragma once

#include <cstddef>
#include <vector>

#include "axrx/tensor.hpp"

// Differentiable primitives. Every function validates its shape contract and
// throws std::invalid_argument naming the primitive and the offending shapes.
// When an input requires a gradient and a Tape is active on the calling
// thread, the operation is recorded and its output requires a gradient too.
//
// All primitives process a batch row by row with arithmetic that does not
// depend on the batch size, so an example's result is bit-identical however
// the batch it belongs to is sliced.

namespace axrx {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

// x: [N, C, ...], bias: [C]; bias is broadcast over every axis but 1.
Tensor add_bias(const Tensor& x, const Tensor& bias);

// a: [M, K], b: [K, N] -> [M, N]
Tensor matmul(const Tensor& a, const Tensor& b);

// Valid cross-correlation with stride 1.
// x: [N, Cin, H, W], weight: [Cout, Cin, K, K] -> [N, Cout, H-K+1, W-K+1]
Tensor conv2d(const Tensor& x, const Tensor& weight);

// Non-overlapping 2x2 max pooling; odd trailing rows/columns are dropped.
Tensor max_pool2x2(const Tensor& x);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);

enum class LossReduction {
    kMean,          // mean over batch and labels
    kSumOfExampleMeans,  // per-example mean over labels, summed over the batch
};

// Binary cross-entropy on logits in the log-sum-exp stable form.
// logits, labels: [N, L]; labels must be exactly 0 or 1.
Tensor bce_loss(const Tensor& logits, const Tensor& labels, LossReduction reduction = LossReduction::kMean);

// Per-example geometry of a bilinear shrink followed by zero padding.
struct ResizePad {
    std::size_t inner = 0;  // side length after resizing; equal to the input side for identity
    std::size_t offset_y = 0;
    std::size_t offset_x = 0;
};

// x: [N, C, S, S]; one ResizePad per example. Output keeps shape [N, C, S, S].
Tensor resize_pad(const Tensor& x, const std::vector<ResizePad>& geometry);

// Non-differentiable helpers.
Tensor sign(const Tensor& t);

struct L1Normalized {
    Tensor value;
    bool degenerate = false;
};
L1Normalized l1_normalize(const Tensor& t);

}  // namespace axrx
