#include "trifuse/tensor.hpp"

namespace trifuse {

std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

namespace {

Index shape_product(const Shape& s) {
    Index n = 1;
    for (Index e : s) {
        if (e <= 0) throw ShapeError("tensor extents must be positive, got " + shape_str(s));
        n *= e;
    }
    return n;
}

}  // namespace

Tensor::Tensor(Shape shape, Array data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size())
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    Index n = shape_product(shape);
    Tensor t(std::move(shape), Array::Zero(n));
    t.requires_grad = requires_grad;
    return t;
}

Tensor Tensor::scalar(Scalar v) {
    Tensor t({1, 1}, Array::Constant(1, v));
    return t;
}

Tensor Tensor::from_matrix(const Matrix& m, bool requires_grad) {
    Tensor t({m.rows(), m.cols()}, ConstArrayMap(m.data(), m.size()));
    t.requires_grad = requires_grad;
    return t;
}

Tensor Tensor::from_row(const Vector& v, bool requires_grad) {
    Tensor t({1, v.size()}, ConstArrayMap(v.data(), v.size()));
    t.requires_grad = requires_grad;
    return t;
}

Tensor Tensor::row(std::initializer_list<Scalar> v) {
    Array a(static_cast<Index>(v.size()));
    Index i = 0;
    for (Scalar x : v) a[i++] = x;
    return Tensor({1, static_cast<Index>(v.size())}, std::move(a));
}

Tensor Tensor::from_flat(Shape shape, Array data, bool requires_grad) {
    Tensor t(std::move(shape), std::move(data));
    t.requires_grad = requires_grad;
    return t;
}

Index Tensor::rows() const {
    if (rank() != 2) throw ShapeError("expected a rank-2 tensor, got " + shape_str(shape_));
    return shape_[0];
}

Index Tensor::cols() const {
    if (rank() != 2) throw ShapeError("expected a rank-2 tensor, got " + shape_str(shape_));
    return shape_[1];
}

ConstMatrixMap Tensor::mat() const { return ConstMatrixMap(data_.data(), rows(), cols()); }

MatrixMap Tensor::mat() { return MatrixMap(data_.data(), rows(), cols()); }

Scalar Tensor::item() const {
    if (!is_scalar()) throw ShapeError("item() on non-scalar tensor of shape " + shape_str(shape_));
    return data_[0];
}

void check_finite(const Tensor& t, const char* what) {
    if (!t.all_finite()) throw Error(std::string(what) + " produced non-finite values");
}

}  // namespace trifuse
