#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "axrx/models.hpp"
#include "axrx/tensor.hpp"

namespace axrx {

enum class AttackMethod : std::uint8_t { kFgsm = 0, kPgd = 1, kMifgsm = 2, kDaa = 3, kDiiFgsm = 4 };

std::string_view method_name(AttackMethod method);
AttackMethod parse_method(std::string_view name);
const std::vector<AttackMethod>& all_methods();
bool is_multi_step(AttackMethod method);

/// Hyperparameters of every L-infinity sign-step attack.
struct AttackSpec {
    AttackMethod method = AttackMethod::kPgd;
    double epsilon = 0.3;
    std::size_t iterations = 10;
    // Defaults to 2.5 * epsilon / iterations; FGSM always steps by epsilon.
    std::optional<double> step_size;
    bool random_start = true;  // PGD only
    double momentum = 1.0;     // MIFGSM
    double transform_prob = 0.5;  // DII-FGSM
    double resize_min = 0.9;      // DII-FGSM scale range [min, max)
    double resize_max = 1.0;
    double daa_c = 0.1;            // DAA coupling strength
    std::optional<double> daa_bandwidth;  // RBF bandwidth; median heuristic when unset
    std::size_t minibatch = 32;    // DAA coupling group size
    std::uint64_t seed = 0;

    double alpha() const;
    std::size_t steps() const { return method == AttackMethod::kFgsm ? 1 : iterations; }
    void validate() const;

    bool operator==(const AttackSpec&) const = default;
};

/// Called with every iterate of every processing chunk. May be invoked
/// concurrently from several workers.
using IterateObserver =
    std::function<void(std::size_t first_example, std::size_t iteration, const Tensor& iterate)>;

struct AttackOptions {
    // Global index of the batch's first example; per-example random streams
    // are derived from (seed, first_index + position).
    std::size_t first_index = 0;
    IterateObserver observer;
};

/// Projects onto the L-infinity ball of radius eps around origin, then onto [0,1].
Tensor clip_ball(const Tensor& candidate, const Tensor& origin, double eps);

// x: [N, 1, S, S] in [0,1]; y: [N, L] in {0,1}. Each returns x* with x's shape.
Tensor attack_fgsm(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                   const AttackOptions& options = {});
Tensor attack_pgd(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                  const AttackOptions& options = {});
Tensor attack_mifgsm(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                     const AttackOptions& options = {});
Tensor attack_daa(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                  const AttackOptions& options = {});
Tensor attack_diifgsm(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                      const AttackOptions& options = {});

/// Plain iterative FGSM: x*_0 = x, steps of alpha * sign(grad). The common
/// reduction target of MIFGSM(mu=0) and DII-FGSM(p=0).
Tensor attack_iterative_fgsm(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                             const AttackOptions& options = {});

/// Dispatches on spec.method.
Tensor run_attack(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                  const AttackOptions& options = {});

/// Gradient of the per-example mean-over-labels BCE with respect to x.
/// Row i depends only on example i.
Tensor input_gradient(const Classifier& model, const Tensor& x, const Tensor& y);

// Canonical JSON form of an AttackSpec (sorted keys, unset optionals null).
std::string attack_spec_to_json(const AttackSpec& spec);
AttackSpec attack_spec_from_json(const std::string& text);

// AXAD adversarial batch format.
struct AdversarialBatch {
    AttackSpec spec;
    std::vector<std::uint32_t> clean_indices;
    Tensor images;  // [N, C, H, W]

    bool operator==(const AdversarialBatch& other) const;
};

std::vector<std::uint8_t> encode_adversarial_batch(const AdversarialBatch& batch);
AdversarialBatch decode_adversarial_batch(std::vector<std::uint8_t> bytes);
void write_adversarial_batch(const AdversarialBatch& batch, const std::filesystem::path& path);
AdversarialBatch read_adversarial_batch(const std::filesystem::path& path);

}  // namespace axrx
