#include "axrx/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "axrx/binary_io.hpp"
#include "axrx/metrics.hpp"
#include "axrx/ops.hpp"
#include "axrx/parallel.hpp"
#include "axrx/rng.hpp"
#include "json_codec.hpp"

namespace axrx {

AttackSpec DefenseSpec::default_inner_attack() {
    AttackSpec a;
    a.method = AttackMethod::kPgd;
    a.epsilon = 4.0 / 255.0;
    a.iterations = 10;
    return a;
}

void DefenseSpec::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("defense spec: lambda must lie in [0,1]");
    if (!(nlm_h > 0.0)) throw std::invalid_argument("defense spec: nlm_h must be > 0");
    inner.validate();
}

double total_loss(double clean, double adversarial, double lambda) {
    return lambda * clean + (1.0 - lambda) * adversarial;
}

Tensor total_loss(const Tensor& clean, const Tensor& adversarial, double lambda) {
    return add(scale(clean, lambda), scale(adversarial, 1.0 - lambda));
}

namespace {

double robust_val_auc(const Classifier& model, const Dataset& val, const AttackSpec& attack) {
    const Tensor x = val.images();
    const Tensor y = val.label_tensor();
    const Tensor adv = run_attack(model, x, y, attack);
    return mean_auc(predict(model, adv), y).mean;
}

}  // namespace

TrainResult adversarial_train(Model& model, const Dataset& train_set, const Dataset* val, const TrainConfig& config,
                              const DefenseSpec& spec) {
    spec.validate();
    TrainConfig total = config;
    total.epochs = spec.pretrain_epochs + config.epochs;

    FitOptions options;
    options.monitor_from_epoch = spec.pretrain_epochs;
    if (spec.select_on_robust && spec.lambda < 1.0) {
        options.val_metric = [&spec](const Model& m, const Dataset& v) {
            const double clean = evaluate_mean_auc(m, v);
            return total_loss(clean, robust_val_auc(m, v, spec.inner), spec.lambda);
        };
    }

    const BatchLoss loss = [&](Model& m, const Tensor& images, const Tensor& labels, std::size_t epoch,
                               std::size_t batch, std::span<const std::size_t>) -> Tensor {
        if (epoch < spec.pretrain_epochs || spec.lambda == 1.0) return bce_loss(m.forward_trainable(images), labels);
        AttackSpec inner = spec.inner;
        inner.seed = mix_seed(mix_seed(spec.inner.seed, epoch), batch);
        // Crafted against a constant view of the current parameters.
        const Tensor adv = run_attack(static_cast<const Classifier&>(m), images, labels, inner);
        Tensor adv_loss = bce_loss(m.forward_trainable(adv), labels);
        if (spec.lambda == 0.0) return adv_loss;
        return total_loss(bce_loss(m.forward_trainable(images), labels), adv_loss, spec.lambda);
    };
    return fit(model, train_set, val, total, loss, options);
}

namespace {

void check_images(const Tensor& images, const char* who) {
    if (images.rank() != 4 || images.dim(2) != images.dim(3))
        throw std::invalid_argument(std::string(who) + ": expected images [N,C,S,S], got " +
                                    shape_str(images.shape()));
}

}  // namespace

Tensor pixel_deflect(const Tensor& images, const DefenseSpec& spec, std::size_t first_index) {
    check_images(images, "pixel_deflect");
    Tensor out = images.clone();
    if (spec.deflections == 0) return out;
    const std::size_t n = images.dim(0), c = images.dim(1), s = images.dim(2);
    const std::size_t plane = s * s;
    auto data = out.mutable_data();
    parallel_for(n, [&](std::size_t i) {
        Rng rng(domain_seed(spec.seed, StreamDomain::kDeflection), first_index + i);
        double* img = data.data() + i * c * plane;
        for (std::size_t k = 0; k < spec.deflections; ++k) {
            const std::size_t ty = rng.index(s), tx = rng.index(s);
            const std::size_t y0 = ty > spec.window ? ty - spec.window : 0;
            const std::size_t x0 = tx > spec.window ? tx - spec.window : 0;
            const std::size_t y1 = std::min(s - 1, ty + spec.window), x1 = std::min(s - 1, tx + spec.window);
            const std::size_t sy = y0 + rng.index(y1 - y0 + 1), sx = x0 + rng.index(x1 - x0 + 1);
            for (std::size_t ch = 0; ch < c; ++ch) img[ch * plane + ty * s + tx] = img[ch * plane + sy * s + sx];
        }
    });
    return out;
}

Tensor denoise_nlm(const Tensor& images, const DefenseSpec& spec) {
    check_images(images, "denoise_nlm");
    if (!(spec.nlm_h > 0.0)) throw std::invalid_argument("denoise_nlm: h must be > 0");
    const std::size_t planes = images.dim(0) * images.dim(1), s = images.dim(2);
    const std::ptrdiff_t ss = static_cast<std::ptrdiff_t>(s);
    const std::ptrdiff_t pr = static_cast<std::ptrdiff_t>(spec.patch_radius);
    const std::ptrdiff_t sr = static_cast<std::ptrdiff_t>(spec.search_radius);
    const double inv_h2 = 1.0 / (spec.nlm_h * spec.nlm_h);
    Tensor out(images.shape());
    auto src = images.data();
    auto dst = out.mutable_data();
    parallel_for(planes, [&](std::size_t p) {
        const double* in = src.data() + p * s * s;
        double* o = dst.data() + p * s * s;
        // Edge-replicated copy so every patch is complete.
        const std::ptrdiff_t ps = ss + 2 * pr;
        std::vector<double> pad(static_cast<std::size_t>(ps * ps));
        for (std::ptrdiff_t y = 0; y < ps; ++y)
            for (std::ptrdiff_t x = 0; x < ps; ++x) {
                const std::ptrdiff_t cy = std::clamp(y - pr, std::ptrdiff_t{0}, ss - 1);
                const std::ptrdiff_t cx = std::clamp(x - pr, std::ptrdiff_t{0}, ss - 1);
                pad[static_cast<std::size_t>(y * ps + x)] = in[cy * ss + cx];
            }
        auto patch_distance = [&](std::ptrdiff_t ay, std::ptrdiff_t ax, std::ptrdiff_t by, std::ptrdiff_t bx) {
            double d = 0.0;
            for (std::ptrdiff_t dy = 0; dy <= 2 * pr; ++dy)
                for (std::ptrdiff_t dx = 0; dx <= 2 * pr; ++dx) {
                    const double diff = pad[static_cast<std::size_t>((ay + dy) * ps + ax + dx)] -
                                        pad[static_cast<std::size_t>((by + dy) * ps + bx + dx)];
                    d += diff * diff;
                }
            return d;
        };
        for (std::ptrdiff_t y = 0; y < ss; ++y)
            for (std::ptrdiff_t x = 0; x < ss; ++x) {
                double num = 0.0, den = 0.0;
                for (std::ptrdiff_t qy = std::max<std::ptrdiff_t>(0, y - sr); qy <= std::min(ss - 1, y + sr); ++qy)
                    for (std::ptrdiff_t qx = std::max<std::ptrdiff_t>(0, x - sr); qx <= std::min(ss - 1, x + sr);
                         ++qx) {
                        const double w = std::exp(-patch_distance(y, x, qy, qx) * inv_h2);
                        num += w * in[qy * ss + qx];
                        den += w;
                    }
                // den >= 1 from the self term.
                o[y * ss + x] = std::clamp(num / den, 0.0, 1.0);
            }
    });
    return out;
}

Tensor pdt_transform(const Tensor& images, const DefenseSpec& spec, std::size_t first_index) {
    return denoise_nlm(pixel_deflect(images, spec, first_index), spec);
}

Tensor defend_pdt(const Classifier& model, const Tensor& images, const DefenseSpec& spec, std::size_t first_index) {
    return predict(model, pdt_transform(images, spec, first_index));
}

Tensor defend_combined(const Classifier& adv_trained_model, const Tensor& images, const DefenseSpec& spec,
                       std::size_t first_index) {
    return defend_pdt(adv_trained_model, images, spec, first_index);
}

void save_bundle(const Model& model, const DefenseSpec& spec, const std::filesystem::path& stem) {
    spec.validate();
    save_model(model, std::filesystem::path(stem.string() + ".axmd"));
    write_file_atomic(std::filesystem::path(stem.string() + ".defense.json"), defense_spec_to_json(spec) + "\n");
}

DefendedBundle load_bundle(const std::filesystem::path& stem) {
    Model model = load_model(std::filesystem::path(stem.string() + ".axmd"));
    const auto bytes = read_file_bytes(std::filesystem::path(stem.string() + ".defense.json"));
    return {std::move(model), defense_spec_from_json(std::string(bytes.begin(), bytes.end()))};
}

}  // namespace axrx
