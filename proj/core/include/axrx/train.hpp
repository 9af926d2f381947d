#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "axrx/data.hpp"
#include "axrx/models.hpp"

namespace axrx {

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t patience = 5;  // epochs without validation improvement; 0 disables early stopping
    std::uint64_t seed = 17;
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_mean_auc;
};

struct TrainResult {
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;
    bool stopped_early = false;
};

class Adam {
public:
    Adam(const std::vector<Tensor>& params, const TrainConfig& config);
    // Applies one update from the parameters' gradient buffers.
    void step(std::vector<Tensor>& params);

private:
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

/// Builds the minibatch loss on the active tape. `epoch` is zero-based.
using BatchLoss = std::function<Tensor(Model& model, const Tensor& images, const Tensor& labels, std::size_t epoch,
                                       std::size_t batch_index, std::span<const std::size_t> example_indices)>;

struct FitOptions {
    // Epochs before this one never count as the best epoch.
    std::size_t monitor_from_epoch = 0;
    // Model selection score on the validation set; clean mean AUC when empty.
    std::function<double(const Model& model, const Dataset& val)> val_metric;
};

/// Minibatch Adam loop shared by standard and adversarial training.
/// When `val` is non-empty the parameters with the best validation mean AUC
/// are restored at the end.
TrainResult fit(Model& model, const Dataset& train_set, const Dataset* val, const TrainConfig& config,
                const BatchLoss& batch_loss, const FitOptions& options = {});

/// Mean-BCE training with Adam. Labels must be resolved.
TrainResult train(Model& model, const Dataset& train_set, const Dataset& val, const TrainConfig& config);
TrainResult train(Model& model, const Dataset& train_set, const TrainConfig& config);

/// Clean mean AUC of a classifier on a resolved dataset, in fixed-size chunks.
double evaluate_mean_auc(const Classifier& classifier, const Dataset& dataset);

}  // namespace axrx
