#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "axrx/tensor.hpp"

namespace axrx {

enum class RawLabel : std::uint8_t { kNegative = 0, kPositive = 1, kUncertain = 2 };

/// Observation names of the chest X-ray benchmark, in label order.
const std::vector<std::string>& default_label_names();

/// Multi-label single-channel image set. Pixels are stored as doubles that
/// are exactly representable as f32 (the on-disk precision) and lie in [0,1].
struct Dataset {
    std::size_t side = 0;
    std::vector<std::string> label_names;
    std::vector<double> pixels;        // [N, S, S] row-major
    std::vector<std::uint8_t> labels;  // [N, L] RawLabel codes

    std::size_t size() const { return side == 0 ? 0 : pixels.size() / (side * side); }
    std::size_t num_labels() const { return label_names.size(); }
    bool resolved() const;

    /// [N, 1, S, S] image batch, all examples or the given ones.
    Tensor images() const;
    Tensor images(std::span<const std::size_t> indices) const;
    /// [N, L] 0/1 labels; throws if any label is still uncertain.
    Tensor label_tensor() const;
    Tensor label_tensor(std::span<const std::size_t> indices) const;

    Dataset subset(std::span<const std::size_t> indices) const;

    // Throws std::invalid_argument describing the first violated invariant.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// Resolution of uncertain labels, one target value per label name.
struct LabelPolicy {
    std::map<std::string, std::uint8_t> uncertain_to;

    /// Atelectasis and Edema read uncertain as positive; every other label
    /// in `names` reads it as negative.
    static LabelPolicy standard(const std::vector<std::string>& names);
};

Dataset resolve_labels(const Dataset& dataset, const LabelPolicy& policy);

struct SyntheticConfig {
    std::size_t count = 4000;
    std::size_t side = 32;
    std::size_t num_labels = 6;
    std::uint64_t seed = 17;
    double uncertainty_rate = 0.05;

    double noise_sigma = 0.03;
    double background = 0.35;
    double background_jitter = 0.04;
    double label_correlation = 0.3;  // correlation of the latent label scores
    double label_threshold = 0.25;   // latent score above this -> positive
    // Localized finding: anisotropic Gaussian blob at a label-specific
    // position and orientation with per-image amplitude and position jitter.
    double blob_amplitude_min = 0.3;
    double blob_amplitude_max = 0.6;
    double blob_sigma = 2.2;
    double blob_jitter = 1.0;
    // Probability that a negative label still shows its blob.
    double distractor_rate = 0.15;
    // Low-contrast label-specific grating whose phase flips with the label.
    double texture_amplitude = 0.01;
    double texture_period = 11.0;
};

Dataset generate_synthetic(const SyntheticConfig& config);

struct DatasetSplits {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Seeded shuffle split, by default 70/15/15.
DatasetSplits split_dataset(const Dataset& dataset, std::uint64_t seed, double train_fraction = 0.70,
                            double val_fraction = 0.15);

// AXDS file format.
std::vector<std::uint8_t> encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::vector<std::uint8_t> bytes);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace axrx
