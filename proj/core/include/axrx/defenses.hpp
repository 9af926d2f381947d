#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "axrx/attacks.hpp"
#include "axrx/data.hpp"
#include "axrx/models.hpp"
#include "axrx/train.hpp"

namespace axrx {

struct DefenseSpec {
    double lambda = 0.6;  // weight of the clean loss term
    AttackSpec inner = default_inner_attack();
    std::size_t pretrain_epochs = 6;
    // Model selection during adversarial training: lambda-weighted clean and
    // inner-attack validation AUC when true, clean AUC otherwise.
    bool select_on_robust = true;

    // Pixel deflection
    std::size_t deflections = 100;
    std::size_t window = 10;  // radius r of the (2r+1)^2 source window

    // Non-local means
    double nlm_h = 0.1;
    std::size_t patch_radius = 1;   // 3x3 patches
    std::size_t search_radius = 5;  // 11x11 search window

    std::uint64_t seed = 0;

    static AttackSpec default_inner_attack();
    void validate() const;
    bool operator==(const DefenseSpec&) const = default;
};

/// lambda * clean + (1 - lambda) * adversarial.
double total_loss(double clean, double adversarial, double lambda);
Tensor total_loss(const Tensor& clean, const Tensor& adversarial, double lambda);

/// Clean pretraining for spec.pretrain_epochs, then config.epochs epochs on
/// the mixed loss with adversarial examples regenerated for every minibatch
/// against the current parameters. Early stopping only considers epochs
/// after pretraining.
TrainResult adversarial_train(Model& model, const Dataset& train_set, const Dataset* val, const TrainConfig& config,
                              const DefenseSpec& spec);

// images: [N, 1, S, S] in [0,1]. Example i draws from the stream of global
// index first_index + i.
Tensor pixel_deflect(const Tensor& images, const DefenseSpec& spec, std::size_t first_index = 0);
Tensor denoise_nlm(const Tensor& images, const DefenseSpec& spec);
Tensor pdt_transform(const Tensor& images, const DefenseSpec& spec, std::size_t first_index = 0);

/// Logits of the model on PDT-transformed images.
Tensor defend_pdt(const Classifier& model, const Tensor& images, const DefenseSpec& spec,
                  std::size_t first_index = 0);
/// PDT in front of an adversarially trained model.
Tensor defend_combined(const Classifier& adv_trained_model, const Tensor& images, const DefenseSpec& spec,
                       std::size_t first_index = 0);

// Canonical JSON form of a DefenseSpec, used by defended-model bundles.
std::string defense_spec_to_json(const DefenseSpec& spec);
DefenseSpec defense_spec_from_json(const std::string& text);

/// A checkpoint plus the defense that wraps it: <stem>.axmd and <stem>.defense.json.
struct DefendedBundle {
    Model model;
    DefenseSpec spec;
};
void save_bundle(const Model& model, const DefenseSpec& spec, const std::filesystem::path& stem);
DefendedBundle load_bundle(const std::filesystem::path& stem);

}  // namespace axrx
