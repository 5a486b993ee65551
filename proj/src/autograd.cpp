#include "trifuse/autograd.hpp"

#include <cmath>
#include <utility>

namespace trifuse {

namespace {

Tape& tape_of(const Var& v, const char* op) {
    if (!v.valid()) throw UsageError(std::string(op) + ": unbound Var");
    return *v.tape();
}

Tape& same_tape(const Var& a, const Var& b, const char* op) {
    Tape& t = tape_of(a, op);
    if (&t != &tape_of(b, op)) throw UsageError(std::string(op) + ": operands live on different tapes");
    return t;
}

const Tensor& rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a rank-2 tensor, got " + shape_str(t.shape()));
    return t;
}

ConstMatrixMap grad_mat(const Tape::Node& n) {
    return ConstMatrixMap(n.grad.data(), n.value.shape()[0], n.value.shape()[1]);
}

}  // namespace

const Tensor& Var::value() const { return tape_of(*this, "Var::value").value(*this); }

Var Tape::leaf(Tensor& t) {
    Node n;
    n.value = t;
    n.needs_grad = t.requires_grad;
    n.external = &t;
    nodes_.push_back(std::move(n));
    return Var(this, node_count() - 1);
}

Var Tape::constant(Tensor t) {
    Node n;
    n.value = std::move(t);
    n.value.requires_grad = false;
    nodes_.push_back(std::move(n));
    return Var(this, node_count() - 1);
}

Var Tape::push(const char* op, Tensor value, bool needs_grad, std::function<void(Tape&, Index)> back) {
    check_finite(value, op);
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    if (needs_grad) n.backward = std::move(back);
    nodes_.push_back(std::move(n));
    return Var(this, node_count() - 1);
}

void Tape::accumulate(Index id, const Array& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return;
    if (!n.grad_alloc) {
        n.grad = Array::Zero(n.value.size());
        n.grad_alloc = true;
    }
    if (g.size() != n.grad.size())
        throw ShapeError("gradient size " + std::to_string(g.size()) + " does not match node size " +
                         std::to_string(n.grad.size()));
    n.grad += g;
}

void Tape::accumulate(Index id, const Matrix& g) { accumulate(id, Array(ConstArrayMap(g.data(), g.size()))); }

const Tensor& Tape::value(const Var& v) const { return nodes_[static_cast<std::size_t>(v.id())].value; }

bool Tape::needs_grad(const Var& v) const { return nodes_[static_cast<std::size_t>(v.id())].needs_grad; }

const Array* Tape::node_grad(const Var& v) const {
    const Node& n = nodes_[static_cast<std::size_t>(v.id())];
    return n.grad_alloc ? &n.grad : nullptr;
}

void Tape::backward(const Var& loss) {
    if (!loss.valid() || loss.tape() != this) throw UsageError("backward: loss Var does not belong to this tape");
    if (spent_) throw UsageError("backward: tape already consumed; build a fresh tape per forward pass");
    spent_ = true;

    Node& ln = nodes_[static_cast<std::size_t>(loss.id())];
    if (ln.value.size() != 1)
        throw UsageError("backward: loss must be scalar, got shape " + shape_str(ln.value.shape()));
    if (!ln.needs_grad) return;  // constant graph: no gradients to write

    accumulate(loss.id(), Array(Array::Ones(1)));
    for (Index id = loss.id(); id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.needs_grad || !n.grad_alloc) continue;  // never reached by the loss
        if (n.backward) n.backward(*this, id);
        if (n.external && n.external->requires_grad) {
            if (!n.grad.isFinite().all()) throw Error("backward produced non-finite gradients");
            n.external->grad = n.grad;
        }
    }
}

// ---- ops ----

Var matmul(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b, "matmul");
    const Tensor& A = rank2(t.value(a), "matmul");
    const Tensor& B = rank2(t.value(b), "matmul");
    if (A.cols() != B.rows())
        throw ShapeError("matmul: inner extents differ: " + shape_str(A.shape()) + " vs " + shape_str(B.shape()));
    Tensor out = Tensor::from_matrix(A.mat() * B.mat());
    bool ng = t.needs_grad(a) || t.needs_grad(b);
    Index ida = a.id(), idb = b.id();
    return t.push("matmul", std::move(out), ng, [ida, idb](Tape& tp, Index self) {
        ConstMatrixMap dC = grad_mat(tp.node(self));
        if (tp.node(ida).needs_grad) tp.accumulate(ida, Matrix(dC * tp.node(idb).value.mat().transpose()));
        if (tp.node(idb).needs_grad) tp.accumulate(idb, Matrix(tp.node(ida).value.mat().transpose() * dC));
    });
}

Var add(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b, "add");
    const Tensor& A = t.value(a);
    const Tensor& B = t.value(b);
    if (A.shape() != B.shape())
        throw ShapeError("add: shapes differ: " + shape_str(A.shape()) + " vs " + shape_str(B.shape()));
    Tensor out = Tensor::from_flat(A.shape(), A.flat() + B.flat());
    bool ng = t.needs_grad(a) || t.needs_grad(b);
    Index ida = a.id(), idb = b.id();
    return t.push("add", std::move(out), ng, [ida, idb](Tape& tp, Index self) {
        const Array& g = tp.node(self).grad;
        tp.accumulate(ida, g);
        tp.accumulate(idb, g);
    });
}

Var scale(const Var& a, Scalar s) {
    Tape& t = tape_of(a, "scale");
    const Tensor& A = t.value(a);
    Tensor out = Tensor::from_flat(A.shape(), A.flat() * s);
    Index ida = a.id();
    return t.push("scale", std::move(out), t.needs_grad(a), [ida, s](Tape& tp, Index self) {
        tp.accumulate(ida, Array(tp.node(self).grad * s));
    });
}

Var relu(const Var& a) {
    Tape& t = tape_of(a, "relu");
    const Tensor& A = t.value(a);
    Tensor out = Tensor::from_flat(A.shape(), A.flat().max(0.0));
    Index ida = a.id();
    return t.push("relu", std::move(out), t.needs_grad(a), [ida](Tape& tp, Index self) {
        const Array& x = tp.node(ida).value.flat();
        tp.accumulate(ida, Array(tp.node(self).grad * (x > 0.0).cast<Scalar>()));
    });
}

Var transpose(const Var& a) {
    Tape& t = tape_of(a, "transpose");
    const Tensor& A = rank2(t.value(a), "transpose");
    Tensor out = Tensor::from_matrix(A.mat().transpose());
    Index ida = a.id();
    return t.push("transpose", std::move(out), t.needs_grad(a), [ida](Tape& tp, Index self) {
        tp.accumulate(ida, Matrix(grad_mat(tp.node(self)).transpose()));
    });
}

Matrix softmax_rows_value(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (Index r = 0; r < m.rows(); ++r) {
        Scalar mx = m.row(r).maxCoeff();
        Eigen::ArrayXd e = (m.row(r).array() - mx).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    return out;
}

Var softmax_rows(const Var& a) {
    Tape& t = tape_of(a, "softmax_rows");
    const Tensor& A = rank2(t.value(a), "softmax_rows");
    Tensor out = Tensor::from_matrix(softmax_rows_value(A.mat()));
    Index ida = a.id();
    return t.push("softmax_rows", std::move(out), t.needs_grad(a), [ida](Tape& tp, Index self) {
        // dA_ij = S_ij * (dC_ij - sum_k dC_ik S_ik)
        ConstMatrixMap S = ConstMatrixMap(tp.node(self).value.data(), tp.node(self).value.rows(),
                                          tp.node(self).value.cols());
        ConstMatrixMap dC = grad_mat(tp.node(self));
        Matrix dA(S.rows(), S.cols());
        for (Index r = 0; r < S.rows(); ++r) {
            Scalar dot = (dC.row(r).array() * S.row(r).array()).sum();
            dA.row(r) = (S.row(r).array() * (dC.row(r).array() - dot)).matrix();
        }
        tp.accumulate(ida, dA);
    });
}

Var cross_entropy_logits(const Var& logits, Index true_class) {
    Tape& t = tape_of(logits, "cross_entropy_logits");
    const Tensor& L = rank2(t.value(logits), "cross_entropy_logits");
    if (L.rows() != 1) throw ShapeError("cross_entropy_logits: expected a 1 x C logit row, got " + shape_str(L.shape()));
    Index c = L.cols();
    if (true_class < 0 || true_class >= c)
        throw UsageError("cross_entropy_logits: class " + std::to_string(true_class) + " out of range [0, " +
                         std::to_string(c) + ")");
    Scalar mx = L.mat().maxCoeff();
    Eigen::ArrayXd shifted = L.mat().row(0).array() - mx;
    Scalar lse = std::log(shifted.exp().sum()) + mx;
    Scalar loss = lse - L.mat()(0, true_class);
    Array probs = (L.mat().row(0).array() - lse).exp();  // softmax, stable

    Index ida = logits.id();
    return t.push("cross_entropy_logits", Tensor::scalar(loss), t.needs_grad(logits),
                  [ida, true_class, probs](Tape& tp, Index self) {
                      Scalar g0 = tp.node(self).grad[0];
                      Array d = probs * g0;
                      d[true_class] -= g0;
                      tp.accumulate(ida, d);
                  });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw UsageError("concat_rows: no operands");
    Tape& t = tape_of(parts[0], "concat_rows");
    Index rows_total = 0;
    Index cols = -1;
    bool ng = false;
    for (const Var& p : parts) {
        same_tape(parts[0], p, "concat_rows");
        const Tensor& v = rank2(t.value(p), "concat_rows");
        if (cols < 0) cols = v.cols();
        if (v.cols() != cols)
            throw ShapeError("concat_rows: column counts differ: " + std::to_string(cols) + " vs " +
                             std::to_string(v.cols()));
        rows_total += v.rows();
        ng = ng || t.needs_grad(p);
    }
    Matrix out(rows_total, cols);
    Index at = 0;
    std::vector<std::pair<Index, Index>> spans;  // (node id, row count)
    for (const Var& p : parts) {
        const Tensor& v = t.value(p);
        out.middleRows(at, v.rows()) = v.mat();
        spans.emplace_back(p.id(), v.rows());
        at += v.rows();
    }
    return t.push("concat_rows", Tensor::from_matrix(out), ng, [spans](Tape& tp, Index self) {
        ConstMatrixMap dC = grad_mat(tp.node(self));
        Index at = 0;
        for (auto [id, nrows] : spans) {
            tp.accumulate(id, Matrix(dC.middleRows(at, nrows)));
            at += nrows;
        }
    });
}

Var concat_rows(const Var& a, const Var& b) { return concat_rows(std::vector<Var>{a, b}); }

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw UsageError("concat_cols: no operands");
    Tape& t = tape_of(parts[0], "concat_cols");
    Index cols_total = 0;
    Index rows = -1;
    bool ng = false;
    for (const Var& p : parts) {
        same_tape(parts[0], p, "concat_cols");
        const Tensor& v = rank2(t.value(p), "concat_cols");
        if (rows < 0) rows = v.rows();
        if (v.rows() != rows)
            throw ShapeError("concat_cols: row counts differ: " + std::to_string(rows) + " vs " +
                             std::to_string(v.rows()));
        cols_total += v.cols();
        ng = ng || t.needs_grad(p);
    }
    Matrix out(rows, cols_total);
    Index at = 0;
    std::vector<std::pair<Index, Index>> spans;
    for (const Var& p : parts) {
        const Tensor& v = t.value(p);
        out.middleCols(at, v.cols()) = v.mat();
        spans.emplace_back(p.id(), v.cols());
        at += v.cols();
    }
    return t.push("concat_cols", Tensor::from_matrix(out), ng, [spans](Tape& tp, Index self) {
        ConstMatrixMap dC = grad_mat(tp.node(self));
        Index at = 0;
        for (auto [id, ncols] : spans) {
            tp.accumulate(id, Matrix(dC.middleCols(at, ncols)));
            at += ncols;
        }
    });
}

Var concat_cols(const Var& a, const Var& b) { return concat_cols(std::vector<Var>{a, b}); }

Var mean_rows(const Var& a) {
    Tape& t = tape_of(a, "mean_rows");
    const Tensor& A = rank2(t.value(a), "mean_rows");
    Index m = A.rows();
    Matrix out = A.mat().colwise().mean();
    Index ida = a.id();
    return t.push("mean_rows", Tensor::from_matrix(out), t.needs_grad(a), [ida, m](Tape& tp, Index self) {
        ConstMatrixMap dC = grad_mat(tp.node(self));
        Matrix dA = (dC / static_cast<Scalar>(m)).replicate(m, 1);
        tp.accumulate(ida, dA);
    });
}

Var reshape(const Var& a, Index rows, Index cols) {
    Tape& t = tape_of(a, "reshape");
    const Tensor& A = t.value(a);
    if (rows <= 0 || cols <= 0 || rows * cols != A.size())
        throw ShapeError("reshape: " + shape_str(A.shape()) + " cannot become [" + std::to_string(rows) + "x" +
                         std::to_string(cols) + "]");
    Tensor out = Tensor::from_flat({rows, cols}, A.flat());
    Index ida = a.id();
    return t.push("reshape", std::move(out), t.needs_grad(a), [ida](Tape& tp, Index self) {
        tp.accumulate(ida, tp.node(self).grad);  // same flat layout
    });
}

Var row(const Var& a, Index i) {
    Tape& t = tape_of(a, "row");
    const Tensor& A = rank2(t.value(a), "row");
    if (i < 0 || i >= A.rows())
        throw ShapeError("row: index " + std::to_string(i) + " out of range for " + shape_str(A.shape()));
    Matrix out = A.mat().row(i);
    Index ida = a.id();
    Index m = A.rows(), n = A.cols();
    return t.push("row", Tensor::from_matrix(out), t.needs_grad(a), [ida, i, m, n](Tape& tp, Index self) {
        Matrix dA = Matrix::Zero(m, n);
        dA.row(i) = grad_mat(tp.node(self));
        tp.accumulate(ida, dA);
    });
}

Var sum(const Var& a) {
    Tape& t = tape_of(a, "sum");
    const Tensor& A = t.value(a);
    Index n = A.size();
    Index ida = a.id();
    return t.push("sum", Tensor::scalar(A.flat().sum()), t.needs_grad(a), [ida, n](Tape& tp, Index self) {
        tp.accumulate(ida, Array(Array::Constant(n, tp.node(self).grad[0])));
    });
}

// ---- SGD ----

void sgd_step(Tensor& param, const Array& grad, Array& velocity, Scalar lr, Scalar momentum) {
    if (!(lr > 0)) throw UsageError("sgd_step: lr must be positive");
    if (momentum < 0 || momentum >= 1) throw UsageError("sgd_step: momentum must be in [0, 1)");
    if (grad.size() != param.size())
        throw ShapeError("sgd_step: grad size " + std::to_string(grad.size()) + " vs param size " +
                         std::to_string(param.size()));
    if (velocity.size() == 0) velocity = Array::Zero(param.size());
    if (velocity.size() != param.size())
        throw ShapeError("sgd_step: velocity size " + std::to_string(velocity.size()) + " vs param size " +
                         std::to_string(param.size()));
    velocity = momentum * velocity + grad;
    param.flat() -= lr * velocity;
    check_finite(param, "sgd_step");
}

SgdOptimizer::SgdOptimizer(Scalar lr, Scalar momentum) : lr_(lr), momentum_(momentum) {
    if (!(lr > 0)) throw UsageError("SgdOptimizer: lr must be positive");
    if (momentum < 0 || momentum >= 1) throw UsageError("SgdOptimizer: momentum must be in [0, 1)");
}

void SgdOptimizer::step(const std::vector<Tensor*>& params) {
    if (velocity_.empty()) velocity_.resize(params.size());
    if (velocity_.size() != params.size())
        throw UsageError("SgdOptimizer: parameter count changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        if (!p.grad) throw UsageError("SgdOptimizer: parameter " + std::to_string(i) + " has no gradient");
        sgd_step(p, *p.grad, velocity_[i], lr_, momentum_);
    }
}

}  // namespace trifuse
