#include "hmog/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hmog {

std::string shape_str(const Shape& shape) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ", ";
        out << shape[i];
    }
    if (shape.size() == 1) out << ',';
    out << ')';
    return out.str();
}

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

namespace {

void check_rank(const Shape& shape) {
    if (shape.size() > 2) throw ShapeError("tensor rank > 2 not supported: " + shape_str(shape));
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_rank(shape_);
    values_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), values_(std::move(values)) {
    check_rank(shape_);
    if (values_.size() != shape_size(shape_)) {
        throw ShapeError("tensor of shape " + shape_str(shape_) + " given " + std::to_string(values_.size()) +
                         " values");
    }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::row(std::initializer_list<double> values) {
    return Tensor({1, values.size()}, std::vector<double>(values));
}

double Tensor::item() const {
    if (values_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
    return values_[0];
}

bool Tensor::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::row_at(std::size_t r) const {
    const std::size_t c = cols();
    Tensor out({1, c});
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(r * c), c, out.values_.begin());
    return out;
}

Tensor Tensor::gather_rows(std::span<const std::size_t> indices) const {
    const std::size_t c = cols();
    Tensor out({indices.size(), c});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows()) throw std::out_of_range("gather_rows: row index out of range");
        std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(indices[i] * c), c,
                    out.values_.begin() + static_cast<std::ptrdiff_t>(i * c));
    }
    return out;
}

}  // namespace hmog
