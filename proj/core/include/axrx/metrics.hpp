#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "axrx/tensor.hpp"

namespace axrx {

/// Exact Mann-Whitney AUC: the probability that a random positive scores
/// above a random negative, ties counted one half. Returns nullopt when the
/// labels contain only one class. Labels are 0/1.
std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct AucSummary {
    std::vector<std::optional<double>> per_label;
    double mean = 0.0;
    std::size_t defined_labels = 0;
};

/// Per-label AUC of sigmoid(logits) against binary labels, averaged over the
/// labels that have both classes present. logits, labels: [N, L].
/// Ranking is done on the logits themselves; the sigmoid is strictly
/// increasing, and ranking before it avoids ties from saturation.
AucSummary mean_auc(const Tensor& logits, const Tensor& labels);

/// Mean over examples of the per-example Euclidean norm of (adv - clean).
double l2_distance(const Tensor& clean, const Tensor& adv);

}  // namespace axrx
