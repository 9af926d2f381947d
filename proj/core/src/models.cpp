#include "axrx/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "axrx/binary_io.hpp"
#include "axrx/ops.hpp"
#include "axrx/parallel.hpp"
#include "axrx/rng.hpp"

namespace axrx {

namespace {
constexpr char kModelMagic[] = "AXMD";
constexpr std::uint16_t kModelVersion = 1;
constexpr std::size_t kMlpHidden = 128;

struct ConvStage {
    std::size_t channels;
    bool pool;
};

std::vector<ConvStage> conv_stages(Arch arch) {
    switch (arch) {
        case Arch::kCnnSmall: return {{8, true}, {16, true}};
        case Arch::kCnnWide: return {{12, true}, {24, true}, {32, false}};
        default: return {};
    }
}

}  // namespace

std::string_view arch_name(Arch arch) {
    switch (arch) {
        case Arch::kLinear: return "linear";
        case Arch::kMlp: return "mlp";
        case Arch::kCnnSmall: return "cnn_small";
        case Arch::kCnnWide: return "cnn_wide";
    }
    throw std::invalid_argument("unknown architecture tag");
}

Arch parse_arch(std::string_view name) {
    for (Arch a : all_archs())
        if (arch_name(a) == name) return a;
    throw std::invalid_argument("unknown architecture \"" + std::string(name) +
                                "\" (expected linear, mlp, cnn_small or cnn_wide)");
}

const std::vector<Arch>& all_archs() {
    static const std::vector<Arch> archs = {Arch::kLinear, Arch::kMlp, Arch::kCnnSmall, Arch::kCnnWide};
    return archs;
}

std::vector<Shape> parameter_shapes(Arch arch, std::size_t side, std::size_t labels) {
    if (side == 0 || labels == 0) throw std::invalid_argument("model: side and label count must be positive");
    switch (arch) {
        case Arch::kLinear: return {{side * side, labels}, {labels}};
        case Arch::kMlp: return {{side * side, kMlpHidden}, {kMlpHidden}, {kMlpHidden, labels}, {labels}};
        case Arch::kCnnSmall:
        case Arch::kCnnWide: {
            std::vector<Shape> shapes;
            std::size_t in = 1, extent = side;
            for (const auto& stage : conv_stages(arch)) {
                if (extent < 3) break;
                shapes.push_back({stage.channels, in, 3, 3});
                shapes.push_back({stage.channels});
                extent -= 2;
                if (stage.pool) extent /= 2;
                in = stage.channels;
            }
            if (shapes.size() != 2 * conv_stages(arch).size() || extent == 0)
                throw std::invalid_argument("model: side " + std::to_string(side) + " is too small for " +
                                            std::string(arch_name(arch)));
            shapes.push_back({in * extent * extent, labels});
            shapes.push_back({labels});
            return shapes;
        }
    }
    throw std::invalid_argument("unknown architecture tag");
}

Model::Model(Arch arch, std::size_t side, std::size_t num_labels, std::uint64_t seed, Init init)
    : arch_(arch), side_(side), num_labels_(num_labels) {
    Rng rng(domain_seed(seed, StreamDomain::kInit));
    for (const auto& shape : parameter_shapes(arch, side, num_labels)) {
        Tensor p(shape, 0.0);
        if (init == Init::kRandom && shape.size() > 1) {
            const std::size_t fan_in = shape.size() == 4 ? shape[1] * shape[2] * shape[3] : shape[0];
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
            for (auto& v : p.mutable_data()) v = rng.uniform(-bound, bound);
        }
        params_.push_back(std::move(p));
    }
}

std::size_t Model::parameter_count() const {
    return std::accumulate(params_.begin(), params_.end(), std::size_t{0},
                           [](std::size_t acc, const Tensor& t) { return acc + t.numel(); });
}

Model Model::clone() const {
    Model m;
    m.arch_ = arch_;
    m.side_ = side_;
    m.num_labels_ = num_labels_;
    for (const auto& p : params_) m.params_.push_back(p.clone());
    return m;
}

void Model::check_input(const Tensor& images) const {
    if (images.rank() != 4 || images.dim(1) != 1 || images.dim(2) != side_ || images.dim(3) != side_)
        throw std::invalid_argument("forward_logits: " + std::string(arch_name(arch_)) + " expects images [N,1," +
                                    std::to_string(side_) + "," + std::to_string(side_) + "], got " +
                                    shape_str(images.shape()));
}

Tensor Model::logits(const Tensor& images) const {
    check_input(images);
    std::vector<Tensor> constants;
    constants.reserve(params_.size());
    for (const auto& p : params_) constants.push_back(p.detach());
    return forward(images, constants);
}

Tensor Model::forward_trainable(const Tensor& images) {
    check_input(images);
    for (auto& p : params_) p.set_requires_grad(true);
    return forward(images, params_);
}

Tensor Model::forward(const Tensor& images, const std::vector<Tensor>& p) const {
    const std::size_t n = images.dim(0);
    switch (arch_) {
        case Arch::kLinear: {
            Tensor flat = reshape(images, {n, side_ * side_});
            return add_bias(matmul(flat, p[0]), p[1]);
        }
        case Arch::kMlp: {
            Tensor flat = reshape(images, {n, side_ * side_});
            Tensor hidden = relu(add_bias(matmul(flat, p[0]), p[1]));
            return add_bias(matmul(hidden, p[2]), p[3]);
        }
        case Arch::kCnnSmall:
        case Arch::kCnnWide: {
            Tensor h = images;
            const auto stages = conv_stages(arch_);
            for (std::size_t s = 0; s < stages.size(); ++s) {
                h = relu(add_bias(conv2d(h, p[2 * s]), p[2 * s + 1]));
                if (stages[s].pool) h = max_pool2x2(h);
            }
            const std::size_t k = 2 * stages.size();
            Tensor flat = reshape(h, {n, h.numel() / n});
            return add_bias(matmul(flat, p[k]), p[k + 1]);
        }
    }
    throw std::logic_error("unreachable");
}

EnsembleModel::EnsembleModel(std::vector<std::shared_ptr<const Classifier>> members, std::vector<double> weights)
    : members_(std::move(members)), weights_(std::move(weights)) {
    if (members_.empty()) throw std::invalid_argument("ensemble: at least one member is required");
    if (weights_.size() != members_.size())
        throw std::invalid_argument("ensemble: " + std::to_string(weights_.size()) + " weights for " +
                                    std::to_string(members_.size()) + " members");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw std::invalid_argument("ensemble: weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("ensemble: weights sum to " + std::to_string(total) + ", expected 1");
    for (const auto& m : members_) {
        if (!m) throw std::invalid_argument("ensemble: null member");
        if (m->side() != members_.front()->side() || m->num_labels() != members_.front()->num_labels())
            throw std::invalid_argument("ensemble: members must share input side and label count");
    }
}

EnsembleModel EnsembleModel::uniform(std::vector<std::shared_ptr<const Classifier>> members) {
    std::vector<double> w(members.size(), members.empty() ? 0.0 : 1.0 / static_cast<double>(members.size()));
    return EnsembleModel(std::move(members), std::move(w));
}

Tensor EnsembleModel::logits(const Tensor& images) const {
    Tensor total;
    for (std::size_t k = 0; k < members_.size(); ++k) {
        Tensor term = scale(members_[k]->logits(images), weights_[k]);
        total = total.defined() ? add(total, term) : term;
    }
    return total;
}

Tensor forward_logits(const Classifier& classifier, const Tensor& images) {
    const std::size_t s = classifier.side();
    if (images.rank() != 4 || images.dim(1) != 1 || images.dim(2) != s || images.dim(3) != s)
        throw std::invalid_argument("forward_logits: expected images [N,1," + std::to_string(s) + "," +
                                    std::to_string(s) + "], got " + shape_str(images.shape()));
    for (double v : images.data())
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("forward_logits: pixel value outside [0,1]");
    return classifier.logits(images);
}

Tensor ensemble_logits(const EnsembleModel& ensemble, const Tensor& images) { return forward_logits(ensemble, images); }

Tensor predict(const Classifier& classifier, const Tensor& images) {
    constexpr std::size_t kChunk = 128;
    const std::size_t n = images.rank() == 4 ? images.dim(0) : 0;
    if (n <= kChunk) return forward_logits(classifier, images);
    const std::size_t count = (n + kChunk - 1) / kChunk;
    std::vector<Tensor> pieces(count);
    parallel_for(count, [&](std::size_t c) {
        pieces[c] = forward_logits(classifier, slice_rows(images, c * kChunk, std::min(n, (c + 1) * kChunk)));
    });
    Tensor out({n, classifier.num_labels()});
    for (std::size_t c = 0; c < count; ++c) assign_rows(out, c * kChunk, pieces[c]);
    return out;
}

std::vector<std::uint8_t> encode_model(const Model& model) {
    ByteWriter w;
    w.magic(kModelMagic);
    w.u16(kModelVersion);
    w.u8(static_cast<std::uint8_t>(model.arch()));
    w.u16(static_cast<std::uint16_t>(model.num_labels()));
    w.u16(static_cast<std::uint16_t>(model.side()));
    for (const auto& p : model.parameters()) {
        w.u8(static_cast<std::uint8_t>(p.rank()));
        for (auto e : p.shape()) w.u32(static_cast<std::uint32_t>(e));
        for (double v : p.data()) w.f64(v);
    }
    return w.bytes();
}

Model decode_model(std::vector<std::uint8_t> bytes) {
    ByteReader r(std::move(bytes), "model checkpoint");
    r.expect_magic(kModelMagic);
    r.expect_version(kModelVersion);
    const std::uint8_t tag = r.u8();
    if (tag > static_cast<std::uint8_t>(Arch::kCnnWide))
        throw FormatError(FormatError::Kind::kInvalidContent,
                          "model checkpoint: unknown architecture tag " + std::to_string(tag));
    Model m;
    m.arch_ = static_cast<Arch>(tag);
    m.num_labels_ = r.u16();
    m.side_ = r.u16();
    std::vector<Shape> expected;
    try {
        expected = parameter_shapes(m.arch_, m.side_, m.num_labels_);
    } catch (const std::invalid_argument& e) {
        throw FormatError(FormatError::Kind::kInvalidContent, std::string("model checkpoint: ") + e.what());
    }
    for (const auto& shape : expected) {
        const std::uint8_t rank = r.u8();
        Shape s(rank);
        for (auto& e : s) e = r.u32();
        if (s != shape)
            throw FormatError(FormatError::Kind::kInvalidContent, "model checkpoint: parameter shape " + shape_str(s) +
                                                                      " does not match expected " + shape_str(shape));
        std::vector<double> values(shape_numel(s));
        for (auto& v : values) v = r.f64();
        m.params_.emplace_back(s, std::move(values));
    }
    r.expect_end();
    return m;
}

void save_model(const Model& model, const std::filesystem::path& path) { write_file_atomic(path, encode_model(model)); }

Model load_model(const std::filesystem::path& path) { return decode_model(read_file_bytes(path)); }

}  // namespace axrx
