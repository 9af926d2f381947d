#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace axrx {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major array of doubles with an optional gradient buffer.
///
/// A Tensor is a cheap handle: copies share the same storage, like a
/// framework tensor. Use clone() for an independent copy and detach() for a
/// handle that shares values but is never tracked by a Tape.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const noexcept { return impl_ != nullptr; }

    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const;

    std::span<const double> data() const;
    // In-place writes are reserved for the owner of a tensor (optimizer
    // updates, attack iterates under construction).
    std::span<double> mutable_data();
    double item() const;

    bool requires_grad() const;
    void set_requires_grad(bool value);

    bool has_grad() const;
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    void zero_grad();
    Tensor grad_tensor() const;

    Tensor detach() const;
    Tensor clone() const;
    Tensor reshaped(Shape shape) const;

    const void* id() const noexcept { return impl_.get(); }

private:
    struct Impl {
        Shape shape;
        std::shared_ptr<std::vector<double>> values;
        std::vector<double> grad;
        bool requires_grad = false;
    };
    const Impl& impl() const;
    Impl& impl();

    std::shared_ptr<Impl> impl_;
};

bool bit_equal(const Tensor& a, const Tensor& b);

/// Copy of rows [begin, end) along axis 0.
Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end);
/// Copies `rows` into t starting at row `begin` along axis 0.
void assign_rows(Tensor& t, std::size_t begin, const Tensor& rows);

}  // namespace axrx
