#include "axrx/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "axrx/metrics.hpp"
#include "axrx/ops.hpp"
#include "axrx/parallel.hpp"
#include "axrx/rng.hpp"
#include "axrx/tape.hpp"

namespace axrx {

namespace {
constexpr std::size_t kEvalChunk = 128;
}

Adam::Adam(const std::vector<Tensor>& params, const TrainConfig& c)
    : lr_(c.learning_rate), beta1_(c.beta1), beta2_(c.beta2), eps_(c.adam_epsilon) {
    for (const auto& p : params) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void Adam::step(std::vector<Tensor>& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (!params[k].has_grad()) continue;
        auto w = params[k].mutable_data();
        auto g = params[k].grad();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
        }
    }
}

double evaluate_mean_auc(const Classifier& classifier, const Dataset& dataset) {
    const std::size_t n = dataset.size();
    const std::size_t chunks = (n + kEvalChunk - 1) / kEvalChunk;
    const std::size_t l = classifier.num_labels();
    std::vector<double> logits(n * l);
    parallel_for(chunks, [&](std::size_t c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = c * kEvalChunk; i < std::min(n, (c + 1) * kEvalChunk); ++i) idx.push_back(i);
        Tensor out = classifier.logits(dataset.images(idx));
        std::copy(out.data().begin(), out.data().end(), logits.begin() + static_cast<std::ptrdiff_t>(idx.front() * l));
    });
    return mean_auc(Tensor({n, l}, std::move(logits)), dataset.label_tensor()).mean;
}

TrainResult fit(Model& model, const Dataset& train_set, const Dataset* val, const TrainConfig& config,
                const BatchLoss& batch_loss, const FitOptions& options) {
    if (train_set.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (!train_set.resolved()) throw std::invalid_argument("train: dataset labels must be resolved to {0,1}");
    if (config.batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
    if (val != nullptr && val->size() == 0) val = nullptr;

    auto& params = model.parameters();
    Adam adam(params, config);
    Rng shuffle_rng(domain_seed(config.seed, StreamDomain::kShuffle));
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    std::optional<double> best_auc;
    std::vector<Tensor> best_params;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batches) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::span<const std::size_t> idx(order.data() + start, end - start);
            const Tensor images = train_set.images(idx);
            const Tensor labels = train_set.label_tensor(idx);
            for (auto& p : params)
                if (p.has_grad()) p.zero_grad();
            Tape tape;
            Tensor loss = batch_loss(model, images, labels, epoch, batches, idx);
            const double value = loss.item();
            if (!std::isfinite(value))
                throw std::runtime_error("train: non-finite loss " + std::to_string(value) + " at epoch " +
                                         std::to_string(epoch) + ", batch " + std::to_string(batches));
            tape.backward(loss);
            adam.step(params);
            loss_sum += value;
        }

        EpochStats stats{epoch, loss_sum / static_cast<double>(batches), std::nullopt};
        if (val != nullptr) {
            stats.val_mean_auc =
                options.val_metric ? options.val_metric(model, *val) : evaluate_mean_auc(model, *val);
            if (epoch >= options.monitor_from_epoch) {
                if (!best_auc || *stats.val_mean_auc > *best_auc) {
                    best_auc = stats.val_mean_auc;
                    result.best_epoch = epoch;
                    best_params.clear();
                    for (const auto& p : params) best_params.push_back(p.clone());
                    since_best = 0;
                } else {
                    ++since_best;
                }
            }
        }
        result.history.push_back(stats);
        if (config.patience > 0 && best_auc && since_best >= config.patience) {
            result.stopped_early = true;
            break;
        }
    }
    if (val == nullptr && !result.history.empty()) result.best_epoch = result.history.back().epoch;
    if (!best_params.empty()) {
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto src = best_params[k].data();
            std::copy(src.begin(), src.end(), params[k].mutable_data().begin());
        }
    }
    for (auto& p : params) {
        if (p.has_grad()) p.zero_grad();
        p.set_requires_grad(false);
    }
    return result;
}

namespace {
Tensor clean_loss(Model& model, const Tensor& images, const Tensor& labels, std::size_t, std::size_t,
                  std::span<const std::size_t>) {
    return bce_loss(model.forward_trainable(images), labels);
}
}  // namespace

TrainResult train(Model& model, const Dataset& train_set, const Dataset& val, const TrainConfig& config) {
    return fit(model, train_set, &val, config, clean_loss);
}

TrainResult train(Model& model, const Dataset& train_set, const TrainConfig& config) {
    return fit(model, train_set, nullptr, config, clean_loss);
}

}  // namespace axrx
