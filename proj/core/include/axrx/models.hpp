#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "axrx/tensor.hpp"

namespace axrx {

/// Anything that maps an image batch [N, 1, S, S] to logits [N, L].
///
/// logits() treats the classifier's parameters as constants, so gradients
/// only ever flow back to the images. Implementations are immutable during
/// inference and safe to share across threads.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual Tensor logits(const Tensor& images) const = 0;
    virtual std::size_t side() const = 0;
    virtual std::size_t num_labels() const = 0;
};

/// Architecture tags. Layer shapes for side S and L labels:
///   linear     flatten -> dense(S*S, L)
///   mlp        flatten -> dense(S*S, 128) -> relu -> dense(128, L)
///   cnn_small  conv3x3(1->8) relu pool -> conv3x3(8->16) relu pool -> dense
///   cnn_wide   conv3x3(1->12) relu pool -> conv3x3(12->24) relu pool
///              -> conv3x3(24->32) relu -> dense
enum class Arch : std::uint8_t { kLinear = 0, kMlp = 1, kCnnSmall = 2, kCnnWide = 3 };

std::string_view arch_name(Arch arch);
Arch parse_arch(std::string_view name);
const std::vector<Arch>& all_archs();

enum class Init { kRandom, kZeros };

class Model final : public Classifier {
public:
    Model(Arch arch, std::size_t side, std::size_t num_labels, std::uint64_t seed, Init init = Init::kRandom);

    Arch arch() const { return arch_; }
    std::size_t side() const override { return side_; }
    std::size_t num_labels() const override { return num_labels_; }

    Tensor logits(const Tensor& images) const override;
    /// Forward pass that records parameter use on the active tape.
    Tensor forward_trainable(const Tensor& images);

    std::vector<Tensor>& parameters() { return params_; }
    const std::vector<Tensor>& parameters() const { return params_; }
    std::size_t parameter_count() const;

    Model clone() const;

private:
    Model() = default;
    Tensor forward(const Tensor& images, const std::vector<Tensor>& params) const;
    void check_input(const Tensor& images) const;

    Arch arch_ = Arch::kLinear;
    std::size_t side_ = 0;
    std::size_t num_labels_ = 0;
    std::vector<Tensor> params_;

    friend Model decode_model(std::vector<std::uint8_t> bytes);
};

/// Parameter shapes for an architecture; fixed by (arch, side, labels).
std::vector<Shape> parameter_shapes(Arch arch, std::size_t side, std::size_t num_labels);

/// Convex combination of member logits.
class EnsembleModel final : public Classifier {
public:
    EnsembleModel(std::vector<std::shared_ptr<const Classifier>> members, std::vector<double> weights);
    static EnsembleModel uniform(std::vector<std::shared_ptr<const Classifier>> members);

    Tensor logits(const Tensor& images) const override;
    std::size_t side() const override { return members_.front()->side(); }
    std::size_t num_labels() const override { return members_.front()->num_labels(); }

    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return members_.size(); }

private:
    std::vector<std::shared_ptr<const Classifier>> members_;
    std::vector<double> weights_;
};

/// Validates the [N, 1, S, S] contract and the [0,1] pixel range, then
/// returns classifier.logits(images). No sigmoid is applied.
Tensor forward_logits(const Classifier& classifier, const Tensor& images);
Tensor ensemble_logits(const EnsembleModel& ensemble, const Tensor& images);
/// forward_logits over fixed-size chunks run in parallel. Bit-identical to a
/// single forward_logits call.
Tensor predict(const Classifier& classifier, const Tensor& images);

// AXMD checkpoint format.
std::vector<std::uint8_t> encode_model(const Model& model);
Model decode_model(std::vector<std::uint8_t> bytes);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace axrx
