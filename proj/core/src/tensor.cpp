#include "axrx/tensor.hpp"

#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace axrx {

std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

static void check_extents(const Shape& shape) {
    for (auto e : shape)
        if (e == 0) throw std::invalid_argument("tensor: zero extent in shape " + shape_str(shape));
}

Tensor::Tensor(Shape shape, double fill, bool requires_grad) {
    check_extents(shape);
    auto n = shape_numel(shape);
    impl_ = std::make_shared<Impl>();
    impl_->shape = std::move(shape);
    impl_->values = std::make_shared<std::vector<double>>(n, fill);
    impl_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
    check_extents(shape);
    if (shape_numel(shape) != values.size())
        throw std::invalid_argument("tensor: shape " + shape_str(shape) + " does not match " +
                                    std::to_string(values.size()) + " values");
    impl_ = std::make_shared<Impl>();
    impl_->shape = std::move(shape);
    impl_->values = std::make_shared<std::vector<double>>(std::move(values));
    impl_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(Shape{}, std::vector<double>{value}, requires_grad);
}

const Tensor::Impl& Tensor::impl() const {
    if (!impl_) throw std::logic_error("tensor: use of undefined tensor");
    return *impl_;
}

Tensor::Impl& Tensor::impl() {
    if (!impl_) throw std::logic_error("tensor: use of undefined tensor");
    return *impl_;
}

const Shape& Tensor::shape() const { return impl().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
    const auto& s = shape();
    if (axis >= s.size())
        throw std::out_of_range("tensor: axis " + std::to_string(axis) + " out of range for " + shape_str(s));
    return s[axis];
}

std::size_t Tensor::numel() const { return impl().values->size(); }

std::span<const double> Tensor::data() const { return *impl().values; }

std::span<double> Tensor::mutable_data() { return *impl().values; }

double Tensor::item() const {
    if (numel() != 1) throw std::invalid_argument("tensor: item() on tensor of shape " + shape_str(shape()));
    return (*impl().values)[0];
}

bool Tensor::requires_grad() const { return impl().requires_grad; }

void Tensor::set_requires_grad(bool value) { impl().requires_grad = value; }

bool Tensor::has_grad() const { return !impl().grad.empty(); }

std::span<const double> Tensor::grad() const {
    if (!has_grad()) throw std::logic_error("tensor: no gradient has been computed");
    return impl().grad;
}

std::span<double> Tensor::mutable_grad() {
    auto& i = impl();
    if (i.grad.empty()) i.grad.assign(i.values->size(), 0.0);
    return i.grad;
}

void Tensor::zero_grad() {
    auto& g = impl().grad;
    std::fill(g.begin(), g.end(), 0.0);
}

Tensor Tensor::grad_tensor() const {
    const auto& i = impl();
    if (i.grad.empty()) return Tensor(i.shape, 0.0);
    return Tensor(i.shape, i.grad);
}

Tensor Tensor::detach() const {
    const auto& i = impl();
    Tensor out;
    out.impl_ = std::make_shared<Impl>();
    out.impl_->shape = i.shape;
    out.impl_->values = i.values;
    return out;
}

Tensor Tensor::clone() const {
    const auto& i = impl();
    return Tensor(i.shape, *i.values);
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_numel(shape) != numel())
        throw std::invalid_argument("reshape: cannot view " + shape_str(this->shape()) + " as " + shape_str(shape));
    Tensor out = detach();
    out.impl_->shape = std::move(shape);
    return out;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    auto da = a.data();
    auto db = b.data();
    return std::memcmp(da.data(), db.data(), da.size() * sizeof(double)) == 0;
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end) {
    if (t.rank() == 0 || begin >= end || end > t.dim(0))
        throw std::out_of_range("slice_rows: rows [" + std::to_string(begin) + ", " + std::to_string(end) +
                                ") of " + shape_str(t.shape()));
    const std::size_t per = t.numel() / t.dim(0);
    Shape s = t.shape();
    s[0] = end - begin;
    auto src = t.data();
    return Tensor(std::move(s), std::vector<double>(src.begin() + static_cast<std::ptrdiff_t>(begin * per),
                                                    src.begin() + static_cast<std::ptrdiff_t>(end * per)));
}

void assign_rows(Tensor& t, std::size_t begin, const Tensor& rows) {
    const std::size_t per = t.numel() / t.dim(0);
    if (rows.numel() % per != 0 || begin + rows.numel() / per > t.dim(0))
        throw std::out_of_range("assign_rows: " + shape_str(rows.shape()) + " does not fit into " +
                                shape_str(t.shape()) + " at row " + std::to_string(begin));
    std::copy(rows.data().begin(), rows.data().end(),
              t.mutable_data().begin() + static_cast<std::ptrdiff_t>(begin * per));
}

}  // namespace axrx
