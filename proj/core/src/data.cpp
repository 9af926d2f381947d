#include "axrx/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "axrx/binary_io.hpp"
#include "axrx/rng.hpp"

namespace axrx {

namespace {
constexpr char kDatasetMagic[] = "AXDS";
constexpr std::uint16_t kDatasetVersion = 1;
}  // namespace

const std::vector<std::string>& default_label_names() {
    static const std::vector<std::string> names = {"No Finding", "Atelectasis", "Cardiomegaly",
                                                   "Consolidation", "Edema", "Pleural Effusion"};
    return names;
}

bool Dataset::resolved() const {
    return std::none_of(labels.begin(), labels.end(),
                        [](std::uint8_t l) { return l == static_cast<std::uint8_t>(RawLabel::kUncertain); });
}

Tensor Dataset::images() const {
    std::vector<std::size_t> all(size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return images(all);
}

Tensor Dataset::images(std::span<const std::size_t> indices) const {
    if (indices.empty()) throw std::invalid_argument("dataset: empty image selection");
    const std::size_t per = side * side;
    std::vector<double> out(indices.size() * per);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= size()) throw std::out_of_range("dataset: example index out of range");
        std::copy_n(pixels.begin() + static_cast<std::ptrdiff_t>(indices[i] * per), per,
                    out.begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    return Tensor({indices.size(), 1, side, side}, std::move(out));
}

Tensor Dataset::label_tensor() const {
    std::vector<std::size_t> all(size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return label_tensor(all);
}

Tensor Dataset::label_tensor(std::span<const std::size_t> indices) const {
    if (indices.empty()) throw std::invalid_argument("dataset: empty label selection");
    const std::size_t l = num_labels();
    std::vector<double> out(indices.size() * l);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= size()) throw std::out_of_range("dataset: example index out of range");
        for (std::size_t j = 0; j < l; ++j) {
            const auto v = labels[indices[i] * l + j];
            if (v > 1)
                throw std::invalid_argument("dataset: uncertain label on example " + std::to_string(indices[i]) +
                                            " (" + label_names[j] + "); resolve labels first");
            out[i * l + j] = v;
        }
    }
    return Tensor({indices.size(), l}, std::move(out));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.side = side;
    out.label_names = label_names;
    const std::size_t per = side * side, l = num_labels();
    out.pixels.reserve(indices.size() * per);
    out.labels.reserve(indices.size() * l);
    for (auto idx : indices) {
        if (idx >= size()) throw std::out_of_range("dataset: example index out of range");
        out.pixels.insert(out.pixels.end(), pixels.begin() + static_cast<std::ptrdiff_t>(idx * per),
                          pixels.begin() + static_cast<std::ptrdiff_t>((idx + 1) * per));
        out.labels.insert(out.labels.end(), labels.begin() + static_cast<std::ptrdiff_t>(idx * l),
                          labels.begin() + static_cast<std::ptrdiff_t>((idx + 1) * l));
    }
    return out;
}

void Dataset::validate() const {
    if (side == 0) throw std::invalid_argument("dataset: side length must be positive");
    if (label_names.size() < 2) throw std::invalid_argument("dataset: at least two labels are required");
    if (pixels.empty() || pixels.size() % (side * side) != 0)
        throw std::invalid_argument("dataset: pixel count is not a positive multiple of side*side");
    if (labels.size() != size() * num_labels())
        throw std::invalid_argument("dataset: label count does not match examples x labels");
    for (double v : pixels)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("dataset: pixel value outside [0,1]");
    for (auto l : labels)
        if (l > 2) throw std::invalid_argument("dataset: raw label outside {0,1,u}");
}

LabelPolicy LabelPolicy::standard(const std::vector<std::string>& names) {
    LabelPolicy p;
    for (const auto& n : names) p.uncertain_to[n] = (n == "Atelectasis" || n == "Edema") ? 1 : 0;
    return p;
}

Dataset resolve_labels(const Dataset& dataset, const LabelPolicy& policy) {
    Dataset out = dataset;
    const std::size_t l = dataset.num_labels();
    std::vector<std::uint8_t> target(l);
    for (std::size_t j = 0; j < l; ++j) {
        auto it = policy.uncertain_to.find(dataset.label_names[j]);
        if (it == policy.uncertain_to.end())
            throw std::invalid_argument("resolve_labels: policy has no mapping for label \"" +
                                        dataset.label_names[j] + "\"");
        if (it->second > 1)
            throw std::invalid_argument("resolve_labels: policy maps \"" + it->first + "\" outside {0,1}");
        target[j] = it->second;
    }
    for (std::size_t i = 0; i < out.labels.size(); ++i)
        if (out.labels[i] == static_cast<std::uint8_t>(RawLabel::kUncertain)) out.labels[i] = target[i % l];
    return out;
}

namespace {

struct LabelRender {
    double cy, cx;       // blob center
    double cos_t, sin_t; // blob orientation
    double freq_y, freq_x, phase;
};

std::vector<LabelRender> label_renders(const SyntheticConfig& c) {
    std::vector<LabelRender> out(c.num_labels);
    const double s = static_cast<double>(c.side);
    const double center = (s - 1.0) / 2.0;
    const double ring = 0.28 * s;
    const auto l = static_cast<double>(c.num_labels);
    for (std::size_t j = 0; j < c.num_labels; ++j) {
        const double k = static_cast<double>(j);
        const double angle = 2.0 * std::numbers::pi * k / l;
        const double orient = std::numbers::pi * k / l;
        const double period = c.texture_period * (1.0 + 0.15 * static_cast<double>(j % 3));
        const double tex_angle = std::numbers::pi * (k + 0.5) / l;
        out[j] = LabelRender{center + ring * std::sin(angle), center + ring * std::cos(angle), std::cos(orient),
                             std::sin(orient), 2.0 * std::numbers::pi * std::sin(tex_angle) / period,
                             2.0 * std::numbers::pi * std::cos(tex_angle) / period, 1.7 * k};
    }
    return out;
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& c) {
    if (c.count == 0 || c.side < 8 || c.num_labels < 2)
        throw std::invalid_argument("generate_synthetic: need count > 0, side >= 8 and at least two labels");
    if (!(c.uncertainty_rate >= 0.0 && c.uncertainty_rate <= 1.0))
        throw std::invalid_argument("generate_synthetic: uncertainty rate must lie in [0,1]");
    if (!(c.label_correlation >= 0.0 && c.label_correlation < 1.0))
        throw std::invalid_argument("generate_synthetic: label correlation must lie in [0,1)");
    if (!(c.distractor_rate >= 0.0 && c.distractor_rate <= 1.0))
        throw std::invalid_argument("generate_synthetic: distractor rate must lie in [0,1]");
    if (!(c.blob_amplitude_min >= 0.0 && c.blob_amplitude_min <= c.blob_amplitude_max))
        throw std::invalid_argument("generate_synthetic: blob amplitude range is empty or negative");

    Dataset d;
    d.side = c.side;
    const auto& defaults = default_label_names();
    for (std::size_t j = 0; j < c.num_labels; ++j)
        d.label_names.push_back(j < defaults.size() ? defaults[j] : "Finding " + std::to_string(j + 1));

    const std::size_t s = c.side, per = s * s, l = c.num_labels;
    d.pixels.resize(c.count * per);
    d.labels.resize(c.count * l);
    const auto renders = label_renders(c);
    const double sig_major = c.blob_sigma * 1.4, sig_minor = c.blob_sigma * 0.7;
    const std::uint64_t base = domain_seed(c.seed, StreamDomain::kData);

    // Each label's texture lives in the angular sector around its blob.
    std::vector<std::size_t> sector(per);
    for (std::size_t y = 0; y < s; ++y)
        for (std::size_t x = 0; x < s; ++x) {
            const double center = (static_cast<double>(s) - 1.0) / 2.0;
            double a = std::atan2(static_cast<double>(y) - center, static_cast<double>(x) - center);
            if (a < 0) a += 2.0 * std::numbers::pi;
            const double slot = a * static_cast<double>(l) / (2.0 * std::numbers::pi) + 0.5;
            sector[y * s + x] = static_cast<std::size_t>(slot) % l;
        }

    std::vector<std::uint8_t> truth(l);
    std::vector<double> img(per);
    for (std::size_t i = 0; i < c.count; ++i) {
        Rng rng(base, i);
        const double shared = rng.normal(0.0, 1.0);
        for (std::size_t j = 0; j < l; ++j) {
            const double z = std::sqrt(c.label_correlation) * shared +
                             std::sqrt(1.0 - c.label_correlation) * rng.normal(0.0, 1.0);
            truth[j] = z > c.label_threshold ? 1 : 0;
        }
        const double level = c.background + rng.uniform(-c.background_jitter, c.background_jitter);
        const double slope = rng.uniform(-0.5, 0.5) * c.background_jitter / static_cast<double>(s);
        std::fill(img.begin(), img.end(), 0.0);
        for (std::size_t y = 0; y < s; ++y)
            for (std::size_t x = 0; x < s; ++x)
                img[y * s + x] = level + slope * (static_cast<double>(y) - static_cast<double>(s) / 2.0);

        for (std::size_t j = 0; j < l; ++j) {
            const auto& r = renders[j];
            const double polarity = truth[j] ? 1.0 : -1.0;
            const double amplitude = rng.uniform(c.blob_amplitude_min, c.blob_amplitude_max);
            const double cy = r.cy + rng.uniform(-c.blob_jitter, c.blob_jitter);
            const double cx = r.cx + rng.uniform(-c.blob_jitter, c.blob_jitter);
            const bool blob = truth[j] || rng.bernoulli(c.distractor_rate);
            for (std::size_t y = 0; y < s; ++y)
                for (std::size_t x = 0; x < s; ++x) {
                    const double fy = static_cast<double>(y), fx = static_cast<double>(x);
                    double v = 0.0;
                    if (sector[y * s + x] == j)
                        v = polarity * c.texture_amplitude * std::cos(r.freq_y * fy + r.freq_x * fx + r.phase);
                    if (blob) {
                        const double dy = fy - cy, dx = fx - cx;
                        const double u = dx * r.cos_t + dy * r.sin_t;
                        const double w = -dx * r.sin_t + dy * r.cos_t;
                        v += amplitude * std::exp(-0.5 * (u * u / (sig_major * sig_major) + w * w / (sig_minor * sig_minor)));
                    }
                    img[y * s + x] += v;
                }
        }
        for (std::size_t p = 0; p < per; ++p) {
            const double v = std::clamp(img[p] + rng.normal(0.0, c.noise_sigma), 0.0, 1.0);
            d.pixels[i * per + p] = static_cast<double>(static_cast<float>(v));
        }
        for (std::size_t j = 0; j < l; ++j)
            d.labels[i * l + j] = rng.bernoulli(c.uncertainty_rate) ? static_cast<std::uint8_t>(RawLabel::kUncertain)
                                                                      : truth[j];
    }
    return d;
}

DatasetSplits split_dataset(const Dataset& dataset, std::uint64_t seed, double train_fraction, double val_fraction) {
    if (!(train_fraction > 0.0 && val_fraction >= 0.0 && train_fraction + val_fraction < 1.0))
        throw std::invalid_argument("split_dataset: fractions must leave a non-empty test split");
    const std::size_t n = dataset.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(domain_seed(seed, StreamDomain::kSplit));
    std::shuffle(order.begin(), order.end(), rng.engine());
    const auto n_train = static_cast<std::size_t>(std::round(train_fraction * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::round(val_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train + n_val >= n) throw std::invalid_argument("split_dataset: dataset too small to split");
    auto part = [&](std::size_t from, std::size_t to) {
        std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(from),
                                     order.begin() + static_cast<std::ptrdiff_t>(to));
        std::sort(idx.begin(), idx.end());
        return dataset.subset(idx);
    };
    return {part(0, n_train), part(n_train, n_train + n_val), part(n_train + n_val, n)};
}

std::vector<std::uint8_t> encode_dataset(const Dataset& d) {
    d.validate();
    if (d.size() > 0xFFFFFFFFull || d.num_labels() > 0xFFFF || d.side > 0xFFFF)
        throw std::invalid_argument("write_dataset: dimensions exceed the file format limits");
    ByteWriter w;
    w.magic(kDatasetMagic);
    w.u16(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(d.size()));
    w.u16(static_cast<std::uint16_t>(d.num_labels()));
    w.u16(static_cast<std::uint16_t>(d.side));
    for (const auto& name : d.label_names) w.str(name);
    const std::size_t per = d.side * d.side, l = d.num_labels();
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t p = 0; p < per; ++p) {
            const double v = d.pixels[i * per + p];
            const auto f = static_cast<float>(v);
            if (static_cast<double>(f) != v)
                throw std::invalid_argument("write_dataset: pixel value is not representable as f32");
            w.f32(f);
        }
        for (std::size_t j = 0; j < l; ++j) w.u8(d.labels[i * l + j]);
    }
    return w.bytes();
}

Dataset decode_dataset(std::vector<std::uint8_t> bytes) {
    ByteReader r(std::move(bytes), "dataset file");
    r.expect_magic(kDatasetMagic);
    r.expect_version(kDatasetVersion);
    Dataset d;
    const std::uint32_t n = r.u32();
    const std::uint16_t l = r.u16();
    d.side = r.u16();
    for (std::uint16_t j = 0; j < l; ++j) d.label_names.push_back(r.str());
    const std::size_t per = d.side * d.side;
    d.pixels.resize(static_cast<std::size_t>(n) * per);
    d.labels.resize(static_cast<std::size_t>(n) * l);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < per; ++p) d.pixels[i * per + p] = static_cast<double>(r.f32());
        for (std::size_t j = 0; j < l; ++j) d.labels[i * l + j] = r.u8();
    }
    r.expect_end();
    try {
        d.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(FormatError::Kind::kInvalidContent, std::string("dataset file: ") + e.what());
    }
    return d;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    write_file_atomic(path, encode_dataset(dataset));
}

Dataset read_dataset(const std::filesystem::path& path) { return decode_dataset(read_file_bytes(path)); }

}  // namespace axrx
