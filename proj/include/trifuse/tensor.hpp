#pragma once

#include <Eigen/Core>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "trifuse/errors.hpp"

namespace trifuse {

using Scalar = double;
using Index = Eigen::Index;

// All dense math runs on row-major doubles so flat buffers, feature files
// and checkpoints share one layout.
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstArrayMap = Eigen::Map<const Array>;

using Shape = std::vector<Index>;

// "[3x4]"
std::string shape_str(const Shape& s);

// Dense row-major value with an optional gradient buffer. Rank is
// arbitrary; the recorded ops work on rank-2 tensors, rank-4 holds frame
// stacks. No broadcasting anywhere: shape alignment is always explicit.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor scalar(Scalar v);
    static Tensor from_matrix(const Matrix& m, bool requires_grad = false);
    // 1 x n row
    static Tensor from_row(const Vector& v, bool requires_grad = false);
    static Tensor row(std::initializer_list<Scalar> v);
    static Tensor from_flat(Shape shape, Array data, bool requires_grad = false);

    const Shape& shape() const { return shape_; }
    Index rank() const { return static_cast<Index>(shape_.size()); }
    Index size() const { return data_.size(); }
    bool is_scalar() const { return data_.size() == 1; }

    // rank-2 accessors
    Index rows() const;
    Index cols() const;
    ConstMatrixMap mat() const;
    MatrixMap mat();
    Scalar operator()(Index r, Index c) const { return mat()(r, c); }
    Scalar& operator()(Index r, Index c) { return mat()(r, c); }

    Scalar item() const;

    Scalar* data() { return data_.data(); }
    const Scalar* data() const { return data_.data(); }
    Array& flat() { return data_; }
    const Array& flat() const { return data_; }

    bool all_finite() const { return data_.isFinite().all(); }

    bool requires_grad = false;
    std::optional<Array> grad;  // flat, same length as data when present

private:
    Tensor(Shape shape, Array data);

    Shape shape_;
    Array data_;
};

// Throws if any entry is NaN/Inf; `what` names the producing operation.
void check_finite(const Tensor& t, const char* what);

}  // namespace trifuse
