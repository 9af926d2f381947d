#include "axrx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace axrx {

std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc: " + std::to_string(scores.size()) + " scores for " +
                                    std::to_string(labels.size()) + " labels");
    std::uint64_t positives = 0;
    for (auto l : labels) {
        if (l > 1) throw std::invalid_argument("auc: labels must be 0 or 1");
        positives += l;
    }
    const std::uint64_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) return std::nullopt;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the Mann-Whitney U statistic, kept integral: each positive earns
    // 2 per negative strictly below it and 1 per negative tied with it.
    std::uint64_t twice_u = 0;
    std::uint64_t negatives_below = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::uint64_t group_pos = 0, group_neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]]) ++group_pos; else ++group_neg;
            ++j;
        }
        twice_u += group_pos * (2 * negatives_below + group_neg);
        negatives_below += group_neg;
        i = j;
    }
    return static_cast<double>(twice_u) / static_cast<double>(2 * positives * negatives);
}

AucSummary mean_auc(const Tensor& logits, const Tensor& labels) {
    if (logits.rank() != 2 || logits.shape() != labels.shape())
        throw std::invalid_argument("mean_auc: logits " + shape_str(logits.shape()) + " and labels " +
                                    shape_str(labels.shape()) + " must share shape [N, L]");
    const std::size_t n = logits.dim(0), l = logits.dim(1);
    AucSummary out;
    out.per_label.resize(l);
    std::vector<double> col(n);
    std::vector<std::uint8_t> lab(n);
    double total = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = logits.data()[i * l + j];
            const double y = labels.data()[i * l + j];
            if (y != 0.0 && y != 1.0) throw std::invalid_argument("mean_auc: labels must be resolved to {0,1}");
            lab[i] = static_cast<std::uint8_t>(y);
        }
        out.per_label[j] = auc(col, lab);
        if (out.per_label[j]) {
            total += *out.per_label[j];
            ++out.defined_labels;
        }
    }
    if (out.defined_labels == 0) throw std::invalid_argument("mean_auc: every label is single-class; AUC undefined");
    out.mean = total / static_cast<double>(out.defined_labels);
    return out;
}

double l2_distance(const Tensor& clean, const Tensor& adv) {
    if (clean.shape() != adv.shape())
        throw std::invalid_argument("l2_distance: shapes " + shape_str(clean.shape()) + " and " +
                                    shape_str(adv.shape()) + " differ");
    const std::size_t n = clean.rank() == 0 ? 1 : clean.dim(0);
    const std::size_t per = clean.numel() / n;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < per; ++j) {
            const double d = adv.data()[i * per + j] - clean.data()[i * per + j];
            s += d * d;
        }
        total += std::sqrt(s);
    }
    return total / static_cast<double>(n);
}

}  // namespace axrx
