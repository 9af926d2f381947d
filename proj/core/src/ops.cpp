#include "axrx/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "axrx/tape.hpp"

namespace axrx {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MapRowVec = Eigen::Map<RowVec>;
using CMapRowVec = Eigen::Map<const RowVec>;

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b, const char* what) {
    throw std::invalid_argument(std::string(op) + ": " + what + " (got " + shape_str(a) + " and " + shape_str(b) + ")");
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const char* what) {
    throw std::invalid_argument(std::string(op) + ": " + what + " (got " + shape_str(a) + ")");
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
    if (Tape::active() == nullptr) return false;
    for (const Tensor* t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

void record(Tensor& out, Tape::BackwardFn fn) {
    out.set_requires_grad(true);
    Tape::active()->record(out, std::move(fn));
}

// Adds src into the gradient buffer of t if t takes part in differentiation.
template <typename F>
void accumulate(Tensor t, F&& body) {
    if (!t.requires_grad()) return;
    body(t.mutable_grad());
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) shape_error("add", a.shape(), b.shape(), "operand shapes differ");
    Tensor out(a.shape());
    auto o = out.mutable_data();
    auto da = a.data(), db = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = da[i] + db[i];
    if (tracking({&a, &b})) {
        record(out, [a, b](const Tensor& y) {
            auto g = y.grad();
            accumulate(a, [&](std::span<double> ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
            accumulate(b, [&](std::span<double> gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i]; });
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) shape_error("sub", a.shape(), b.shape(), "operand shapes differ");
    Tensor out(a.shape());
    auto o = out.mutable_data();
    auto da = a.data(), db = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = da[i] - db[i];
    if (tracking({&a, &b})) {
        record(out, [a, b](const Tensor& y) {
            auto g = y.grad();
            accumulate(a, [&](std::span<double> ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
            accumulate(b, [&](std::span<double> gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i]; });
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape(), "operand shapes differ");
    Tensor out(a.shape());
    auto o = out.mutable_data();
    auto da = a.data(), db = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = da[i] * db[i];
    if (tracking({&a, &b})) {
        record(out, [a, b](const Tensor& y) {
            auto g = y.grad();
            auto va = a.data(), vb = b.data();
            accumulate(a, [&](std::span<double> ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i]; });
            accumulate(b, [&](std::span<double> gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i]; });
        });
    }
    return out;
}

Tensor scale(const Tensor& a, double factor) {
    Tensor out(a.shape());
    auto o = out.mutable_data();
    auto da = a.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = da[i] * factor;
    if (tracking({&a})) {
        record(out, [a, factor](const Tensor& y) {
            auto g = y.grad();
            accumulate(a, [&](std::span<double> ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor; });
        });
    }
    return out;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
    if (x.rank() < 2 || bias.rank() != 1 || bias.dim(0) != x.dim(1))
        shape_error("add_bias", x.shape(), bias.shape(), "bias must be [C] for input [N, C, ...]");
    const std::size_t n = x.dim(0), c = x.dim(1);
    const std::size_t inner = x.numel() / (n * c);
    Tensor out(x.shape());
    auto o = out.mutable_data();
    auto dx = x.data(), db = bias.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < c; ++k) {
            const std::size_t base = (i * c + k) * inner;
            for (std::size_t j = 0; j < inner; ++j) o[base + j] = dx[base + j] + db[k];
        }
    if (tracking({&x, &bias})) {
        record(out, [x, bias, n, c, inner](const Tensor& y) {
            auto g = y.grad();
            accumulate(x, [&](std::span<double> gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i]; });
            accumulate(bias, [&](std::span<double> gb) {
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t k = 0; k < c; ++k) {
                        const std::size_t base = (i * c + k) * inner;
                        double s = 0.0;
                        for (std::size_t j = 0; j < inner; ++j) s += g[base + j];
                        gb[k] += s;
                    }
            });
        });
    }
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        shape_error("matmul", a.shape(), b.shape(), "inner dimensions must agree for [M,K] x [K,N]");
    const auto m = static_cast<Eigen::Index>(a.dim(0));
    const auto k = static_cast<Eigen::Index>(a.dim(1));
    const auto n = static_cast<Eigen::Index>(b.dim(1));
    Tensor out({a.dim(0), b.dim(1)});
    {
        CMapMat B(b.data().data(), k, n);
        for (Eigen::Index i = 0; i < m; ++i) {
            CMapRowVec ai(a.data().data() + i * k, k);
            MapRowVec oi(out.mutable_data().data() + i * n, n);
            oi.noalias() = ai * B;
        }
    }
    if (tracking({&a, &b})) {
        record(out, [a, b, m, k, n](const Tensor& y) {
            CMapMat G(y.grad().data(), m, n);
            accumulate(a, [&](std::span<double> ga) {
                CMapMat B(b.data().data(), k, n);
                for (Eigen::Index i = 0; i < m; ++i) {
                    CMapRowVec gi(y.grad().data() + i * n, n);
                    MapRowVec gai(ga.data() + i * k, k);
                    gai.noalias() += gi * B.transpose();
                }
            });
            accumulate(b, [&](std::span<double> gb) {
                CMapMat A(a.data().data(), m, k);
                MapMat GB(gb.data(), k, n);
                GB.noalias() += A.transpose() * G;
            });
        });
    }
    return out;
}

namespace {

// Unfolds one [Cin, H, W] image into a [Cin*K*K, Ho*Wo] column matrix.
void im2col(const double* img, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, double* cols) {
    const std::size_t ho = h - k + 1, wo = w - k + 1;
    std::size_t row = 0;
    for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx, ++row) {
                double* dst = cols + row * ho * wo;
                for (std::size_t y = 0; y < ho; ++y) {
                    const double* src = img + (c * h + y + ky) * w + kx;
                    std::copy(src, src + wo, dst + y * wo);
                }
            }
}

void col2im_add(const double* cols, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, double* img) {
    const std::size_t ho = h - k + 1, wo = w - k + 1;
    std::size_t row = 0;
    for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx, ++row) {
                const double* src = cols + row * ho * wo;
                for (std::size_t y = 0; y < ho; ++y) {
                    double* dst = img + (c * h + y + ky) * w + kx;
                    for (std::size_t x = 0; x < wo; ++x) dst[x] += src[y * wo + x];
                }
            }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight) {
    if (x.rank() != 4 || weight.rank() != 4)
        shape_error("conv2d", x.shape(), weight.shape(), "expected input [N,Cin,H,W] and weight [Cout,Cin,K,K]");
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t cout = weight.dim(0), k = weight.dim(2);
    if (weight.dim(1) != cin || weight.dim(3) != k)
        shape_error("conv2d", x.shape(), weight.shape(), "weight channels or kernel shape do not match input");
    if (k > h || k > w) shape_error("conv2d", x.shape(), weight.shape(), "kernel larger than input");
    const std::size_t ho = h - k + 1, wo = w - k + 1;
    const std::size_t patch = cin * k * k, pixels = ho * wo;

    Tensor out({n, cout, ho, wo});
    const bool tracked = tracking({&x, &weight});
    // Columns are kept for the weight gradient only.
    auto cols = std::make_shared<std::vector<double>>((tracked && weight.requires_grad() ? n : 1) * patch * pixels);
    CMapMat W(weight.data().data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(patch));
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = cols->data() + (tracked && weight.requires_grad() ? i * patch * pixels : 0);
        im2col(x.data().data() + i * cin * h * w, cin, h, w, k, ci);
        CMapMat C(ci, static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(pixels));
        MapMat O(out.mutable_data().data() + i * cout * pixels, static_cast<Eigen::Index>(cout),
                 static_cast<Eigen::Index>(pixels));
        O.noalias() = W * C;
    }
    if (tracked) {
        record(out, [x, weight, cols, n, cin, h, w, cout, k, patch, pixels](const Tensor& y) {
            const auto P = static_cast<Eigen::Index>(patch);
            const auto Q = static_cast<Eigen::Index>(pixels);
            const auto Co = static_cast<Eigen::Index>(cout);
            accumulate(weight, [&](std::span<double> gw) {
                MapMat GW(gw.data(), Co, P);
                for (std::size_t i = 0; i < n; ++i) {
                    CMapMat G(y.grad().data() + i * cout * pixels, Co, Q);
                    CMapMat C(cols->data() + i * patch * pixels, P, Q);
                    GW.noalias() += G * C.transpose();
                }
            });
            accumulate(x, [&](std::span<double> gx) {
                CMapMat W(weight.data().data(), Co, P);
                RowMat dcols(P, Q);
                for (std::size_t i = 0; i < n; ++i) {
                    CMapMat G(y.grad().data() + i * cout * pixels, Co, Q);
                    dcols.noalias() = W.transpose() * G;
                    col2im_add(dcols.data(), cin, h, w, k, gx.data() + i * cin * h * w);
                }
            });
        });
    }
    return out;
}

Tensor max_pool2x2(const Tensor& x) {
    if (x.rank() != 4) shape_error("max_pool2x2", x.shape(), "expected input [N,C,H,W]");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h < 2 || w < 2) shape_error("max_pool2x2", x.shape(), "spatial extent below 2");
    const std::size_t ho = h / 2, wo = w / 2;
    Tensor out({n, c, ho, wo});
    auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
    auto o = out.mutable_data();
    auto in = x.data();
    std::size_t idx = 0;
    for (std::size_t plane = 0; plane < n * c; ++plane) {
        const std::size_t base = plane * h * w;
        for (std::size_t y = 0; y < ho; ++y)
            for (std::size_t xx = 0; xx < wo; ++xx, ++idx) {
                std::size_t best = base + (2 * y) * w + 2 * xx;
                for (std::size_t dy = 0; dy < 2; ++dy)
                    for (std::size_t dx = 0; dx < 2; ++dx) {
                        const std::size_t j = base + (2 * y + dy) * w + 2 * xx + dx;
                        if (in[j] > in[best]) best = j;
                    }
                o[idx] = in[best];
                (*argmax)[idx] = best;
            }
    }
    if (tracking({&x})) {
        record(out, [x, argmax](const Tensor& y) {
            auto g = y.grad();
            accumulate(x, [&](std::span<double> gx) {
                for (std::size_t i = 0; i < g.size(); ++i) gx[(*argmax)[i]] += g[i];
            });
        });
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape());
    auto o = out.mutable_data();
    auto in = x.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = in[i] > 0.0 ? in[i] : 0.0;
    if (tracking({&x})) {
        record(out, [x](const Tensor& y) {
            auto g = y.grad();
            auto in = x.data();
            accumulate(x, [&](std::span<double> gx) {
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (in[i] > 0.0) gx[i] += g[i];
            });
        });
    }
    return out;
}

static double logistic(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
    Tensor out(x.shape());
    auto o = out.mutable_data();
    auto in = x.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = logistic(in[i]);
    if (tracking({&x})) {
        record(out, [x](const Tensor& y) {
            auto g = y.grad();
            auto s = y.data();
            accumulate(x, [&](std::span<double> gx) {
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * s[i] * (1.0 - s[i]);
            });
        });
    }
    return out;
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    Tensor out = Tensor::scalar(s);
    if (tracking({&x})) {
        record(out, [x](const Tensor& y) {
            const double g = y.grad()[0];
            accumulate(x, [&](std::span<double> gx) { for (auto& v : gx) v += g; });
        });
    }
    return out;
}

Tensor mean(const Tensor& x) {
    const double count = static_cast<double>(x.numel());
    double s = 0.0;
    for (double v : x.data()) s += v;
    Tensor out = Tensor::scalar(s / count);
    if (tracking({&x})) {
        record(out, [x, count](const Tensor& y) {
            const double g = y.grad()[0] / count;
            accumulate(x, [&](std::span<double> gx) { for (auto& v : gx) v += g; });
        });
    }
    return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) shape_error("reshape", x.shape(), shape, "element counts differ");
    Tensor out(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
    if (tracking({&x})) {
        record(out, [x](const Tensor& y) {
            auto g = y.grad();
            accumulate(x, [&](std::span<double> gx) { for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i]; });
        });
    }
    return out;
}

Tensor bce_loss(const Tensor& logits, const Tensor& labels, LossReduction reduction) {
    if (logits.rank() != 2 || logits.shape() != labels.shape())
        shape_error("bce_loss", logits.shape(), labels.shape(), "logits and labels must share shape [N, L]");
    const std::size_t n = logits.dim(0), l = logits.dim(1);
    auto z = logits.data();
    auto t = labels.data();
    for (double v : t)
        if (v != 0.0 && v != 1.0)
            throw std::invalid_argument("bce_loss: label value " + std::to_string(v) +
                                        " is not in {0,1}; resolve uncertain labels first");
    const double denom = reduction == LossReduction::kMean ? static_cast<double>(n * l) : static_cast<double>(l);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < l; ++j) {
            const double v = z[i * l + j];
            row += std::max(v, 0.0) - v * t[i * l + j] + std::log1p(std::exp(-std::abs(v)));
        }
        total += row;
    }
    Tensor out = Tensor::scalar(total / denom);
    if (tracking({&logits})) {
        record(out, [logits, labels, denom](const Tensor& y) {
            const double g = y.grad()[0] / denom;
            auto z = logits.data();
            auto t = labels.data();
            accumulate(logits, [&](std::span<double> gz) {
                for (std::size_t i = 0; i < gz.size(); ++i) gz[i] += g * (logistic(z[i]) - t[i]);
            });
        });
    }
    return out;
}

namespace {

struct Tap {
    std::size_t index;
    double weight;
};

// Bilinear taps of output pixel `d` when resampling `src` pixels to `dst`.
std::array<Tap, 2> bilinear_taps(std::size_t d, std::size_t src, std::size_t dst) {
    double pos = (static_cast<double>(d) + 0.5) * static_cast<double>(src) / static_cast<double>(dst) - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, src - 1);
    const double f = pos - static_cast<double>(lo);
    return {Tap{lo, 1.0 - f}, Tap{hi, f}};
}

}  // namespace

Tensor resize_pad(const Tensor& x, const std::vector<ResizePad>& geometry) {
    if (x.rank() != 4 || x.dim(2) != x.dim(3))
        shape_error("resize_pad", x.shape(), "expected square images [N,C,S,S]");
    const std::size_t n = x.dim(0), c = x.dim(1), s = x.dim(2);
    if (geometry.size() != n)
        throw std::invalid_argument("resize_pad: " + std::to_string(geometry.size()) + " geometries for batch of " +
                                    std::to_string(n));
    for (const auto& g : geometry)
        if (g.inner == 0 || g.inner > s || g.offset_y + g.inner > s || g.offset_x + g.inner > s)
            throw std::invalid_argument("resize_pad: geometry does not fit inside side " + std::to_string(s));

    Tensor out(x.shape());
    auto o = out.mutable_data();
    auto in = x.data();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& g = geometry[i];
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t plane = (i * c + ch) * s * s;
            if (g.inner == s) {
                std::copy(in.begin() + plane, in.begin() + plane + s * s, o.begin() + plane);
                continue;
            }
            for (std::size_t y = 0; y < g.inner; ++y) {
                const auto ty = bilinear_taps(y, s, g.inner);
                for (std::size_t xx = 0; xx < g.inner; ++xx) {
                    const auto tx = bilinear_taps(xx, s, g.inner);
                    double v = 0.0;
                    for (const auto& a : ty)
                        for (const auto& b : tx) v += a.weight * b.weight * in[plane + a.index * s + b.index];
                    o[plane + (y + g.offset_y) * s + xx + g.offset_x] = v;
                }
            }
        }
    }
    if (tracking({&x})) {
        record(out, [x, geometry, n, c, s](const Tensor& y) {
            auto g = y.grad();
            accumulate(x, [&](std::span<double> gx) {
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& geo = geometry[i];
                    for (std::size_t ch = 0; ch < c; ++ch) {
                        const std::size_t plane = (i * c + ch) * s * s;
                        if (geo.inner == s) {
                            for (std::size_t j = 0; j < s * s; ++j) gx[plane + j] += g[plane + j];
                            continue;
                        }
                        for (std::size_t yy = 0; yy < geo.inner; ++yy) {
                            const auto ty = bilinear_taps(yy, s, geo.inner);
                            for (std::size_t xx = 0; xx < geo.inner; ++xx) {
                                const auto tx = bilinear_taps(xx, s, geo.inner);
                                const double go = g[plane + (yy + geo.offset_y) * s + xx + geo.offset_x];
                                for (const auto& a : ty)
                                    for (const auto& b : tx) gx[plane + a.index * s + b.index] += a.weight * b.weight * go;
                            }
                        }
                    }
                }
            });
        });
    }
    return out;
}

Tensor sign(const Tensor& t) {
    Tensor out(t.shape());
    auto o = out.mutable_data();
    auto in = t.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = in[i] > 0.0 ? 1.0 : (in[i] < 0.0 ? -1.0 : 0.0);
    return out;
}

L1Normalized l1_normalize(const Tensor& t) {
    double norm = 0.0;
    for (double v : t.data()) norm += std::abs(v);
    if (norm == 0.0) return {Tensor(t.shape(), 0.0), true};
    Tensor out(t.shape());
    auto o = out.mutable_data();
    auto in = t.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = in[i] / norm;
    return {out, false};
}

}  // namespace axrx
