#include "axrx/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "axrx/binary_io.hpp"
#include "axrx/ops.hpp"
#include "axrx/parallel.hpp"
#include "axrx/rng.hpp"
#include "axrx/tape.hpp"

namespace axrx {

namespace {

// Fixed slicing of a batch into work units. It never depends on the worker
// count, and every primitive is row-independent, so results are identical
// however many threads run.
constexpr std::size_t kChunk = 32;

constexpr char kAdvMagic[] = "AXAD";
constexpr std::uint16_t kAdvVersion = 1;

void check_inputs(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec) {
    spec.validate();
    const std::size_t s = model.side();
    if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != s || x.dim(3) != s)
        throw std::invalid_argument("attack: expected images [N,1," + std::to_string(s) + "," + std::to_string(s) +
                                    "], got " + shape_str(x.shape()));
    if (y.rank() != 2 || y.dim(0) != x.dim(0) || y.dim(1) != model.num_labels())
        throw std::invalid_argument("attack: labels " + shape_str(y.shape()) + " do not match images " +
                                    shape_str(x.shape()));
    for (double v : x.data())
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("attack: clean pixel outside [0,1]");
}

void check_finite(const Tensor& g) {
    for (double v : g.data())
        if (!std::isfinite(v)) throw std::runtime_error("attack: non-finite input gradient");
}

Tensor gradient_through(const Classifier& model, const Tensor& x, const Tensor& y,
                        const std::vector<ResizePad>* geometry) {
    Tape tape;
    Tensor input = x.clone();
    input.set_requires_grad(true);
    Tensor fed = geometry ? resize_pad(input, *geometry) : input;
    Tensor loss = bce_loss(model.logits(fed), y, LossReduction::kSumOfExampleMeans);
    tape.backward(loss);
    Tensor g = input.grad_tensor();
    check_finite(g);
    return g;
}

Tensor step(const Tensor& current, const Tensor& direction, double alpha, const Tensor& origin, double eps) {
    Tensor s = sign(direction);
    Tensor moved(current.shape());
    auto m = moved.mutable_data();
    auto c = current.data();
    auto d = s.data();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = c[i] + alpha * d[i];
    return clip_ball(moved, origin, eps);
}

// Runs fn over fixed-size row chunks of (x, y) and stitches the results.
template <typename Fn>
Tensor chunked(const Tensor& x, const Tensor& y, std::size_t chunk, Fn&& fn) {
    const std::size_t n = x.dim(0);
    Tensor out(x.shape());
    const std::size_t count = (n + chunk - 1) / chunk;
    std::vector<Tensor> pieces(count);
    parallel_for(count, [&](std::size_t c) {
        const std::size_t begin = c * chunk, end = std::min(n, begin + chunk);
        pieces[c] = fn(slice_rows(x, begin, end), slice_rows(y, begin, end), begin);
    });
    for (std::size_t c = 0; c < count; ++c) assign_rows(out, c * chunk, pieces[c]);
    return out;
}

void observe(const AttackOptions& o, std::size_t first, std::size_t t, const Tensor& iterate) {
    if (o.observer) o.observer(o.first_index + first, t, iterate);
}

Rng example_stream(const AttackSpec& spec, std::size_t global_index) {
    return Rng(domain_seed(spec.seed, StreamDomain::kAttack), global_index);
}

// Direction for iteration t given the current iterate of one chunk.
using Direction = std::function<Tensor(const Tensor& current, std::size_t t)>;

Tensor sign_iterations(const Tensor& x, Tensor start, const AttackSpec& spec, const AttackOptions& options,
                       std::size_t first, const Direction& direction) {
    Tensor current = std::move(start);
    observe(options, first, 0, current);
    const double alpha = spec.alpha();
    for (std::size_t t = 0; t < spec.iterations; ++t) {
        current = step(current, direction(current, t), alpha, x, spec.epsilon);
        observe(options, first, t + 1, current);
    }
    return current;
}

// Per-example L1 normalization; degenerate rows become zero.
Tensor normalize_rows(const Tensor& g) {
    const std::size_t n = g.dim(0), per = g.numel() / n;
    Tensor out(g.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = l1_normalize(slice_rows(g, i, i + 1));
        std::copy(row.value.data().begin(), row.value.data().end(),
                  out.mutable_data().begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    return out;
}

double median_pairwise_distance(const Tensor& x) {
    const std::size_t m = x.dim(0), per = x.numel() / m;
    std::vector<double> d;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < per; ++k) {
                const double diff = x.data()[i * per + k] - x.data()[j * per + k];
                s += diff * diff;
            }
            d.push_back(std::sqrt(s));
        }
    if (d.empty()) return 0.0;
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    if (d.size() % 2 == 1) return d[mid];
    const double upper = d[mid];
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid - 1), d.end());
    return 0.5 * (upper + d[mid - 1]);
}

}  // namespace

std::string_view method_name(AttackMethod method) {
    switch (method) {
        case AttackMethod::kFgsm: return "fgsm";
        case AttackMethod::kPgd: return "pgd";
        case AttackMethod::kMifgsm: return "mifgsm";
        case AttackMethod::kDaa: return "daa";
        case AttackMethod::kDiiFgsm: return "dii-fgsm";
    }
    throw std::invalid_argument("unknown attack method tag");
}

AttackMethod parse_method(std::string_view name) {
    for (auto m : all_methods())
        if (method_name(m) == name) return m;
    throw std::invalid_argument("unknown attack \"" + std::string(name) +
                                "\" (expected fgsm, pgd, mifgsm, daa or dii-fgsm)");
}

const std::vector<AttackMethod>& all_methods() {
    static const std::vector<AttackMethod> methods = {AttackMethod::kPgd, AttackMethod::kMifgsm, AttackMethod::kDaa,
                                                      AttackMethod::kDiiFgsm, AttackMethod::kFgsm};
    return methods;
}

bool is_multi_step(AttackMethod method) { return method != AttackMethod::kFgsm; }

double AttackSpec::alpha() const {
    if (method == AttackMethod::kFgsm) return epsilon;
    return step_size.value_or(2.5 * epsilon / static_cast<double>(iterations));
}

void AttackSpec::validate() const {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("attack spec: epsilon must be >= 0");
    if (iterations < 1) throw std::invalid_argument("attack spec: iterations must be >= 1");
    const double a = alpha();
    if (!(a >= 0.0) || (a == 0.0 && epsilon > 0.0))
        throw std::invalid_argument("attack spec: step size must be > 0");
    if (!(momentum >= 0.0)) throw std::invalid_argument("attack spec: momentum must be >= 0");
    if (!(transform_prob >= 0.0 && transform_prob <= 1.0))
        throw std::invalid_argument("attack spec: transform probability must lie in [0,1]");
    if (!(resize_min > 0.0 && resize_min <= resize_max && resize_max <= 1.0))
        throw std::invalid_argument("attack spec: resize range must satisfy 0 < min <= max <= 1");
    if (minibatch < 1) throw std::invalid_argument("attack spec: DAA minibatch size must be >= 1");
    if (!(daa_c >= 0.0)) throw std::invalid_argument("attack spec: DAA coefficient must be >= 0");
    if (daa_bandwidth && !(*daa_bandwidth > 0.0))
        throw std::invalid_argument("attack spec: DAA bandwidth must be > 0");
}

Tensor clip_ball(const Tensor& candidate, const Tensor& origin, double eps) {
    if (candidate.shape() != origin.shape())
        throw std::invalid_argument("clip_ball: candidate " + shape_str(candidate.shape()) + " and origin " +
                                    shape_str(origin.shape()) + " differ in shape");
    Tensor out(candidate.shape());
    auto o = out.mutable_data();
    auto c = candidate.data();
    auto x = origin.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double v = std::min(std::max(c[i], x[i] - eps), x[i] + eps);
        o[i] = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

Tensor input_gradient(const Classifier& model, const Tensor& x, const Tensor& y) {
    return gradient_through(model, x, y, nullptr);
}

Tensor attack_fgsm(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                   const AttackOptions& options) {
    check_inputs(model, x, y, spec);
    return chunked(x, y, kChunk, [&](const Tensor& xc, const Tensor& yc, std::size_t first) {
        observe(options, first, 0, xc);
        Tensor adv = step(xc, input_gradient(model, xc, yc), spec.epsilon, xc, spec.epsilon);
        observe(options, first, 1, adv);
        return adv;
    });
}

Tensor attack_pgd(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                  const AttackOptions& options) {
    check_inputs(model, x, y, spec);
    return chunked(x, y, kChunk, [&](const Tensor& xc, const Tensor& yc, std::size_t first) {
        Tensor start = xc.clone();
        if (spec.random_start) {
            const std::size_t per = xc.numel() / xc.dim(0);
            auto s = start.mutable_data();
            for (std::size_t i = 0; i < xc.dim(0); ++i) {
                Rng rng = example_stream(spec, options.first_index + first + i);
                for (std::size_t k = 0; k < per; ++k) s[i * per + k] += rng.uniform(-spec.epsilon, spec.epsilon);
            }
            start = clip_ball(start, xc, spec.epsilon);
        }
        return sign_iterations(xc, start, spec, options, first,
                               [&](const Tensor& cur, std::size_t) { return input_gradient(model, cur, yc); });
    });
}

Tensor attack_iterative_fgsm(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                             const AttackOptions& options) {
    check_inputs(model, x, y, spec);
    return chunked(x, y, kChunk, [&](const Tensor& xc, const Tensor& yc, std::size_t first) {
        return sign_iterations(xc, xc.clone(), spec, options, first,
                               [&](const Tensor& cur, std::size_t) { return input_gradient(model, cur, yc); });
    });
}

Tensor attack_mifgsm(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                     const AttackOptions& options) {
    check_inputs(model, x, y, spec);
    return chunked(x, y, kChunk, [&](const Tensor& xc, const Tensor& yc, std::size_t first) {
        Tensor accumulated;
        return sign_iterations(xc, xc.clone(), spec, options, first, [&](const Tensor& cur, std::size_t) {
            Tensor g = normalize_rows(input_gradient(model, cur, yc));
            accumulated = accumulated.defined() ? add(scale(accumulated, spec.momentum), g) : g;
            return accumulated;
        });
    });
}

Tensor attack_diifgsm(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                      const AttackOptions& options) {
    check_inputs(model, x, y, spec);
    const std::size_t side = model.side();
    return chunked(x, y, kChunk, [&](const Tensor& xc, const Tensor& yc, std::size_t first) {
        std::vector<Rng> streams;
        for (std::size_t i = 0; i < xc.dim(0); ++i) streams.push_back(example_stream(spec, options.first_index + first + i));
        return sign_iterations(xc, xc.clone(), spec, options, first, [&](const Tensor& cur, std::size_t) {
            std::vector<ResizePad> geometry(xc.dim(0), ResizePad{side, 0, 0});
            for (std::size_t i = 0; i < geometry.size(); ++i) {
                auto& rng = streams[i];
                if (!(rng.uniform() < spec.transform_prob)) continue;
                const double s = rng.uniform(spec.resize_min, spec.resize_max);
                const auto inner = std::clamp<std::size_t>(
                    s >= 1.0 ? side : static_cast<std::size_t>(std::floor(s * static_cast<double>(side))), 1, side);
                geometry[i] = ResizePad{inner, rng.index(side - inner + 1), rng.index(side - inner + 1)};
            }
            return gradient_through(model, cur, yc, &geometry);
        });
    });
}

Tensor attack_daa(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                  const AttackOptions& options) {
    check_inputs(model, x, y, spec);
    return chunked(x, y, spec.minibatch, [&](const Tensor& xc, const Tensor& yc, std::size_t first) {
        const std::size_t m = xc.dim(0), per = xc.numel() / m;
        const double coupling = spec.daa_c / static_cast<double>(m);
        return sign_iterations(xc, xc.clone(), spec, options, first, [&](const Tensor& cur, std::size_t) {
            Tensor g = input_gradient(model, cur, yc);
            const double h = std::max(spec.daa_bandwidth.value_or(median_pairwise_distance(cur)), 1e-6);
            const double inv_h2 = 1.0 / (h * h);
            auto xv = cur.data();
            auto gv = g.data();
            Tensor direction(cur.shape());
            auto out = direction.mutable_data();
            std::vector<double> kernel(m * m);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    double d2 = 0.0;
                    for (std::size_t k = 0; k < per; ++k) {
                        const double diff = xv[i * per + k] - xv[j * per + k];
                        d2 += diff * diff;
                    }
                    kernel[i * m + j] = std::exp(-0.5 * d2 * inv_h2);
                }
            std::vector<double> term(per);
            for (std::size_t i = 0; i < m; ++i) {
                std::fill(term.begin(), term.end(), 0.0);
                for (std::size_t j = 0; j < m; ++j) {
                    const double kij = kernel[i * m + j];
                    // K(x_i, x_j) grad_j + d/dx_j K(x_i, x_j)
                    for (std::size_t k = 0; k < per; ++k)
                        term[k] += kij * gv[j * per + k] + kij * (xv[i * per + k] - xv[j * per + k]) * inv_h2;
                }
                for (std::size_t k = 0; k < per; ++k) out[i * per + k] = gv[i * per + k] + coupling * term[k];
            }
            return direction;
        });
    });
}

Tensor run_attack(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec,
                  const AttackOptions& options) {
    switch (spec.method) {
        case AttackMethod::kFgsm: return attack_fgsm(model, x, y, spec, options);
        case AttackMethod::kPgd: return attack_pgd(model, x, y, spec, options);
        case AttackMethod::kMifgsm: return attack_mifgsm(model, x, y, spec, options);
        case AttackMethod::kDaa: return attack_daa(model, x, y, spec, options);
        case AttackMethod::kDiiFgsm: return attack_diifgsm(model, x, y, spec, options);
    }
    throw std::invalid_argument("run_attack: unknown method");
}

bool AdversarialBatch::operator==(const AdversarialBatch& other) const {
    return spec == other.spec && clean_indices == other.clean_indices && bit_equal(images, other.images);
}

namespace {
void write_spec(ByteWriter& w, const AttackSpec& s) {
    w.f64(s.epsilon);
    w.u32(static_cast<std::uint32_t>(s.iterations));
    w.u8(s.step_size.has_value());
    w.f64(s.step_size.value_or(0.0));
    w.u8(s.random_start);
    w.f64(s.momentum);
    w.f64(s.transform_prob);
    w.f64(s.resize_min);
    w.f64(s.resize_max);
    w.f64(s.daa_c);
    w.u8(s.daa_bandwidth.has_value());
    w.f64(s.daa_bandwidth.value_or(0.0));
    w.u32(static_cast<std::uint32_t>(s.minibatch));
    w.u64(s.seed);
}

AttackSpec read_spec(ByteReader& r, AttackMethod method) {
    AttackSpec s;
    s.method = method;
    s.epsilon = r.f64();
    s.iterations = r.u32();
    const bool has_step = r.u8() != 0;
    const double step_value = r.f64();
    if (has_step) s.step_size = step_value;
    s.random_start = r.u8() != 0;
    s.momentum = r.f64();
    s.transform_prob = r.f64();
    s.resize_min = r.f64();
    s.resize_max = r.f64();
    s.daa_c = r.f64();
    const bool has_bw = r.u8() != 0;
    const double bw = r.f64();
    if (has_bw) s.daa_bandwidth = bw;
    s.minibatch = r.u32();
    s.seed = r.u64();
    return s;
}
}  // namespace

std::vector<std::uint8_t> encode_adversarial_batch(const AdversarialBatch& b) {
    if (b.images.rank() != 4 || b.images.dim(0) != b.clean_indices.size())
        throw std::invalid_argument("adversarial batch: images must be [N,C,H,W] with one clean index per example");
    ByteWriter w;
    w.magic(kAdvMagic);
    w.u16(kAdvVersion);
    w.u8(static_cast<std::uint8_t>(b.spec.method));
    write_spec(w, b.spec);
    w.u32(static_cast<std::uint32_t>(b.clean_indices.size()));
    w.u16(static_cast<std::uint16_t>(b.images.dim(1)));
    w.u16(static_cast<std::uint16_t>(b.images.dim(2)));
    w.u16(static_cast<std::uint16_t>(b.images.dim(3)));
    const std::size_t per = b.images.numel() / b.images.dim(0);
    for (std::size_t i = 0; i < b.clean_indices.size(); ++i) {
        w.u32(b.clean_indices[i]);
        for (std::size_t k = 0; k < per; ++k) w.f64(b.images.data()[i * per + k]);
    }
    return w.bytes();
}

AdversarialBatch decode_adversarial_batch(std::vector<std::uint8_t> bytes) {
    ByteReader r(std::move(bytes), "adversarial batch");
    r.expect_magic(kAdvMagic);
    r.expect_version(kAdvVersion);
    const std::uint8_t tag = r.u8();
    if (tag > static_cast<std::uint8_t>(AttackMethod::kDiiFgsm))
        throw FormatError(FormatError::Kind::kInvalidContent, "adversarial batch: unknown method tag");
    AdversarialBatch b;
    b.spec = read_spec(r, static_cast<AttackMethod>(tag));
    const std::uint32_t n = r.u32();
    const std::size_t c = r.u16(), h = r.u16(), w = r.u16();
    if (n == 0 || c == 0 || h == 0 || w == 0)
        throw FormatError(FormatError::Kind::kInvalidContent, "adversarial batch: empty dimensions");
    const std::size_t per = c * h * w;
    std::vector<double> pixels(static_cast<std::size_t>(n) * per);
    b.clean_indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.clean_indices[i] = r.u32();
        for (std::size_t k = 0; k < per; ++k) pixels[i * per + k] = r.f64();
    }
    r.expect_end();
    b.images = Tensor({n, c, h, w}, std::move(pixels));
    return b;
}

void write_adversarial_batch(const AdversarialBatch& batch, const std::filesystem::path& path) {
    write_file_atomic(path, encode_adversarial_batch(batch));
}

AdversarialBatch read_adversarial_batch(const std::filesystem::path& path) {
    return decode_adversarial_batch(read_file_bytes(path));
}

}  // namespace axrx
