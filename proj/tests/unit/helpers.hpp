#pragma once

#include <axrx/attacks.hpp>
#include <axrx/data.hpp>
#include <axrx/models.hpp>
#include <axrx/ops.hpp>
#include <axrx/rng.hpp>
#include <axrx/tape.hpp>
#include <axrx/tensor.hpp>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace axrx::test {

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = false) {
    Tensor t(std::move(shape), 0.0, requires_grad);
    Rng rng(seed, 7);
    for (auto& v : t.mutable_data()) v = rng.uniform(lo, hi);
    return t;
}

inline Tensor random_labels(std::size_t n, std::size_t labels, std::uint64_t seed) {
    Tensor y({n, labels});
    Rng rng(seed, 9);
    for (auto& v : y.mutable_data()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
    return y;
}

// One-pixel logistic model: logit = w * x + b.
inline Model logistic_pixel(double w, double b = 0.0) {
    Model m(Arch::kLinear, 1, 1, 0, Init::kZeros);
    m.parameters()[0].mutable_data()[0] = w;
    m.parameters()[1].mutable_data()[0] = b;
    return m;
}

inline Dataset small_dataset(std::size_t n, std::uint64_t seed, std::size_t side = 12) {
    SyntheticConfig c;
    c.count = n;
    c.side = side;
    c.seed = seed;
    return resolve_labels(generate_synthetic(c), LabelPolicy::standard(default_label_names()));
}

// Restores AXRX_WORKERS when it goes out of scope.
class ScopedWorkers {
public:
    explicit ScopedWorkers(const std::string& value) {
        if (const char* old = std::getenv("AXRX_WORKERS")) old_ = old;
        ::setenv("AXRX_WORKERS", value.c_str(), 1);
    }
    ~ScopedWorkers() {
        if (old_) ::setenv("AXRX_WORKERS", old_->c_str(), 1);
        else ::unsetenv("AXRX_WORKERS");
    }

private:
    std::optional<std::string> old_;
};

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("axrx_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Central finite-difference derivative of f with respect to each entry of v.
inline std::vector<double> numeric_gradient(std::span<double> v, const std::function<double()>& f,
                                            double h = 1e-5) {
    std::vector<double> g(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double keep = v[i];
        v[i] = keep + h;
        const double up = f();
        v[i] = keep - h;
        const double down = f();
        v[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-3});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

struct GradientErrors {
    double input = 0.0;
    double params = 0.0;
};

// Worst relative error of analytic against central differences with step
// 1e-5. A coordinate that disagrees is measured again with step 1e-7: a
// ReLU or max-pool kink inside the wider step spoils only the first quotient,
// while a wrong analytic gradient fails both.
inline double gradient_error(std::span<const double> analytic, std::span<double> v, const std::function<double()>& f) {
    const auto coarse = numeric_gradient(v, f);
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double e = max_relative_error(analytic.subspan(i, 1), std::span(coarse).subspan(i, 1));
        if (e > 1e-4) {
            const auto fine = numeric_gradient(v.subspan(i, 1), f, 1e-7);
            e = std::min(e, max_relative_error(analytic.subspan(i, 1), fine));
        }
        worst = std::max(worst, e);
    }
    return worst;
}

// Input and parameter gradient errors of the BCE loss.
inline GradientErrors model_gradient_errors(Model& model, const Tensor& x, const Tensor& y) {
    GradientErrors out;
    Tensor probe = x.clone();
    const Tensor gx = input_gradient(model, probe, y);
    auto input_loss = [&] { return bce_loss(model.logits(probe), y, LossReduction::kSumOfExampleMeans).item(); };
    out.input = gradient_error(gx.data(), probe.mutable_data(), input_loss);

    for (auto& p : model.parameters()) p.zero_grad();
    {
        Tape tape;
        tape.backward(bce_loss(model.forward_trainable(x), y));
    }
    auto param_loss = [&] { return bce_loss(model.logits(x), y).item(); };
    for (auto& p : model.parameters()) {
        std::vector<double> analytic(p.grad().begin(), p.grad().end());
        out.params = std::max(out.params, gradient_error(analytic, p.mutable_data(), param_loss));
    }
    return out;
}

}  // namespace axrx::test
