#pragma once

#include <functional>
#include <vector>

#include "trifuse/tensor.hpp"

namespace trifuse {

class Tape;

// Handle to one node of a Tape.
class Var {
public:
    Var() = default;
    const Tensor& value() const;
    Index id() const { return id_; }
    Tape* tape() const { return tape_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, Index id) : tape_(tape), id_(id) {}
    Tape* tape_ = nullptr;
    Index id_ = -1;
};

// Records the forward graph in construction order (which is automatically
// topological) and replays it once in reverse to populate gradients.
// Single-threaded and single-use: a second backward() call is rejected.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaf tracking an external tensor. When the tensor has requires_grad
    // set, backward() assigns its grad buffer.
    Var leaf(Tensor& t);

    // Owned constant; never receives a gradient.
    Var constant(Tensor t);

    // Reverse pass from a scalar loss node. Visits each node exactly once.
    void backward(const Var& loss);
    bool spent() const { return spent_; }

    const Tensor& value(const Var& v) const;
    bool needs_grad(const Var& v) const;

    // Gradient buffer of a node after backward(); nullptr when none was
    // computed for it.
    const Array* node_grad(const Var& v) const;

    Index node_count() const { return static_cast<Index>(nodes_.size()); }

    // --- plumbing used by the op implementations ---
    struct Node {
        Tensor value;
        Array grad;
        bool needs_grad = false;
        bool grad_alloc = false;
        Tensor* external = nullptr;
        std::function<void(Tape&, Index)> backward;
    };

    Var push(const char* op, Tensor value, bool needs_grad, std::function<void(Tape&, Index)> back);
    void accumulate(Index id, const Array& g);
    void accumulate(Index id, const Matrix& g);
    const Node& node(Index id) const { return nodes_[id]; }

private:
    std::vector<Node> nodes_;
    bool spent_ = false;
};

// ---- recorded operations ----

// standard matrix product; backward accumulates dA = dC*B^T, dB = A^T*dC
Var matmul(const Var& a, const Var& b);
// elementwise, identical shapes (no broadcasting)
Var add(const Var& a, const Var& b);
Var scale(const Var& a, Scalar s);
// max(0, x); derivative at 0 is taken as 0
Var relu(const Var& a);
Var transpose(const Var& a);
// per-row max subtraction keeps this stable for any finite input
Var softmax_rows(const Var& a);
// -log(softmax(logits)[true_class]) on a 1 x C logit row
Var cross_entropy_logits(const Var& logits, Index true_class);
// vertical stack
Var concat_rows(const std::vector<Var>& parts);
Var concat_rows(const Var& a, const Var& b);
// horizontal stack
Var concat_cols(const std::vector<Var>& parts);
Var concat_cols(const Var& a, const Var& b);
// column means: m x n -> 1 x n
Var mean_rows(const Var& a);
// row-major reinterpret, rows*cols must equal size
Var reshape(const Var& a, Index rows, Index cols);
// single-row slice: m x n -> 1 x n
Var row(const Var& a, Index i);
// sum of all entries -> 1 x 1
Var sum(const Var& a);

// plain (non-recorded) row softmax
Matrix softmax_rows_value(const Matrix& m);

// ---- SGD with classic momentum ----
// v <- momentum*v + grad; p <- p - lr*v. An empty velocity buffer is
// zero-initialized to the parameter's size.
void sgd_step(Tensor& param, const Array& grad, Array& velocity, Scalar lr, Scalar momentum);

class SgdOptimizer {
public:
    SgdOptimizer(Scalar lr, Scalar momentum);

    // Applies one step using each parameter's grad buffer. Must be called
    // with the same parameter list every time.
    void step(const std::vector<Tensor*>& params);

    Scalar lr() const { return lr_; }
    Scalar momentum() const { return momentum_; }

private:
    Scalar lr_;
    Scalar momentum_;
    std::vector<Array> velocity_;
};

}  // namespace trifuse
