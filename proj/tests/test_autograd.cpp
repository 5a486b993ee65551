#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "trifuse/autograd.hpp"
#include "trifuse/rng.hpp"

using namespace trifuse;

namespace {

Matrix random_matrix(Rng& rng, Index r, Index c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

constexpr double kFdStep = 1e-5;
constexpr double kFdTol = 1e-4;

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-2}); }

// Finite-difference oracle for a recorded op. `apply` builds the op over the
// given inputs; the output is contracted to a scalar with fixed random row
// and column projections so every output entry carries a distinct upstream
// gradient. Central differences, step 1e-5.
void fd_check(std::function<std::vector<Matrix>(Rng&)> make_inputs,
              std::function<Var(Tape&, const std::vector<Var>&)> apply, int draws, std::uint64_t seed) {
    Rng rng(seed);
    for (int d = 0; d < draws; ++d) {
        std::vector<Matrix> ins = make_inputs(rng);

        // dry run to size the projections
        Index out_rows, out_cols;
        {
            Tape t;
            std::vector<Var> vs;
            for (const Matrix& m : ins) vs.push_back(t.constant(Tensor::from_matrix(m)));
            const Tensor& out = apply(t, vs).value();
            out_rows = out.rows();
            out_cols = out.cols();
        }
        Matrix lproj = random_matrix(rng, 1, out_rows);
        Matrix rproj = random_matrix(rng, out_cols, 1);

        auto scalar_of = [&](const std::vector<Matrix>& xs) {
            Tape t;
            std::vector<Var> vs;
            for (const Matrix& m : xs) vs.push_back(t.constant(Tensor::from_matrix(m)));
            Var out = apply(t, vs);
            if (out.value().size() == 1) return out.value().item();
            Var s = matmul(matmul(t.constant(Tensor::from_matrix(lproj)), out),
                           t.constant(Tensor::from_matrix(rproj)));
            return s.value().item();
        };

        // analytic gradients
        std::vector<Tensor> leaves;
        leaves.reserve(ins.size());
        for (const Matrix& m : ins) leaves.push_back(Tensor::from_matrix(m, /*requires_grad=*/true));
        {
            Tape t;
            std::vector<Var> vs;
            for (Tensor& leaf : leaves) vs.push_back(t.leaf(leaf));
            Var out = apply(t, vs);
            Var loss = out.value().size() == 1
                           ? out
                           : matmul(matmul(t.constant(Tensor::from_matrix(lproj)), out),
                                    t.constant(Tensor::from_matrix(rproj)));
            t.backward(loss);
        }

        for (std::size_t i = 0; i < ins.size(); ++i) {
            REQUIRE(leaves[i].grad.has_value());
            for (Index k = 0; k < ins[i].size(); ++k) {
                std::vector<Matrix> xp = ins, xm = ins;
                xp[i].data()[k] += kFdStep;
                xm[i].data()[k] -= kFdStep;
                double fd = (scalar_of(xp) - scalar_of(xm)) / (2 * kFdStep);
                double an = (*leaves[i].grad)[k];
                INFO("draw ", d, " input ", i, " flat index ", k, " analytic ", an, " fd ", fd);
                CHECK(rel_err(an, fd) < kFdTol);
            }
        }
    }
}

}  // namespace

TEST_CASE("fd: matmul") {
    fd_check(
        [](Rng& rng) {
            Index m = 1 + static_cast<Index>(rng.below(4));
            Index k = 1 + static_cast<Index>(rng.below(4));
            Index n = 1 + static_cast<Index>(rng.below(4));
            return std::vector<Matrix>{random_matrix(rng, m, k), random_matrix(rng, k, n)};
        },
        [](Tape&, const std::vector<Var>& v) { return matmul(v[0], v[1]); }, 50, 101);
}

TEST_CASE("fd: add and scale") {
    fd_check(
        [](Rng& rng) {
            Index m = 1 + static_cast<Index>(rng.below(4));
            Index n = 1 + static_cast<Index>(rng.below(4));
            return std::vector<Matrix>{random_matrix(rng, m, n), random_matrix(rng, m, n)};
        },
        [](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); }, 50, 102);
    fd_check(
        [](Rng& rng) { return std::vector<Matrix>{random_matrix(rng, 3, 2)}; },
        [](Tape&, const std::vector<Var>& v) { return scale(v[0], -2.5); }, 50, 103);
}

TEST_CASE("fd: relu") {
    fd_check(
        [](Rng& rng) {
            Index m = 1 + static_cast<Index>(rng.below(4));
            Index n = 1 + static_cast<Index>(rng.below(4));
            return std::vector<Matrix>{random_matrix(rng, m, n)};
        },
        [](Tape&, const std::vector<Var>& v) { return relu(v[0]); }, 50, 104);
}

TEST_CASE("fd: transpose, reshape, row, sum, mean_rows") {
    fd_check(
        [](Rng& rng) { return std::vector<Matrix>{random_matrix(rng, 3, 4)}; },
        [](Tape&, const std::vector<Var>& v) { return transpose(v[0]); }, 50, 105);
    fd_check(
        [](Rng& rng) { return std::vector<Matrix>{random_matrix(rng, 3, 4)}; },
        [](Tape&, const std::vector<Var>& v) { return reshape(v[0], 2, 6); }, 50, 106);
    fd_check(
        [](Rng& rng) { return std::vector<Matrix>{random_matrix(rng, 3, 4)}; },
        [](Tape&, const std::vector<Var>& v) { return row(v[0], 1); }, 50, 107);
    fd_check(
        [](Rng& rng) { return std::vector<Matrix>{random_matrix(rng, 3, 4)}; },
        [](Tape&, const std::vector<Var>& v) { return sum(v[0]); }, 50, 108);
    fd_check(
        [](Rng& rng) {
            Index m = 1 + static_cast<Index>(rng.below(5));
            return std::vector<Matrix>{random_matrix(rng, m, 3)};
        },
        [](Tape&, const std::vector<Var>& v) { return mean_rows(v[0]); }, 50, 109);
}

TEST_CASE("fd: softmax_rows") {
    fd_check(
        [](Rng& rng) {
            Index m = 1 + static_cast<Index>(rng.below(4));
            Index n = 2 + static_cast<Index>(rng.below(4));
            return std::vector<Matrix>{random_matrix(rng, m, n, -3.0, 3.0)};
        },
        [](Tape&, const std::vector<Var>& v) { return softmax_rows(v[0]); }, 50, 110);
}

TEST_CASE("fd: cross_entropy_logits") {
    fd_check(
        [](Rng& rng) {
            Index c = 2 + static_cast<Index>(rng.below(5));
            return std::vector<Matrix>{random_matrix(rng, 1, c, -4.0, 4.0)};
        },
        [](Tape& t, const std::vector<Var>& v) {
            Index c = t.value(v[0]).cols();
            return cross_entropy_logits(v[0], c / 2);
        },
        50, 111);
}

TEST_CASE("fd: concat_rows and concat_cols") {
    fd_check(
        [](Rng& rng) {
            Index n = 1 + static_cast<Index>(rng.below(4));
            return std::vector<Matrix>{random_matrix(rng, 2, n), random_matrix(rng, 3, n),
                                       random_matrix(rng, 1, n)};
        },
        [](Tape&, const std::vector<Var>& v) { return concat_rows({v[0], v[1], v[2]}); }, 50, 112);
    fd_check(
        [](Rng& rng) {
            Index m = 1 + static_cast<Index>(rng.below(4));
            return std::vector<Matrix>{random_matrix(rng, m, 2), random_matrix(rng, m, 3)};
        },
        [](Tape&, const std::vector<Var>& v) { return concat_cols(v[0], v[1]); }, 50, 113);
}

TEST_CASE("fd: composite sum(relu(x W))") {
    fd_check(
        [](Rng& rng) { return std::vector<Matrix>{random_matrix(rng, 1, 4), random_matrix(rng, 4, 3)}; },
        [](Tape&, const std::vector<Var>& v) { return sum(relu(matmul(v[0], v[1]))); }, 50, 114);
}

TEST_CASE("backward: constant graph writes no gradients") {
    Tape t;
    Var a = t.constant(Tensor::row({1, 2}));
    Var b = t.constant(Tensor::row({3, 4}));
    Var loss = sum(add(a, b));
    t.backward(loss);
    CHECK(t.node_grad(a) == nullptr);
    CHECK(t.node_grad(b) == nullptr);
}

TEST_CASE("backward: linear map has exact gradient") {
    Tensor w = Tensor::row({2.0});
    w.requires_grad = true;
    Matrix c(1, 1);
    c << -3.25;
    Tape t;
    Var loss = matmul(t.constant(Tensor::from_matrix(c)), t.leaf(w));
    t.backward(loss);
    REQUIRE(w.grad.has_value());
    CHECK((*w.grad)[0] == -3.25);  // exact, not approximate
}

TEST_CASE("backward: second call on a spent tape is rejected") {
    Tensor w = Tensor::row({1.0});
    w.requires_grad = true;
    Tape t;
    Var loss = sum(t.leaf(w));
    t.backward(loss);
    CHECK(t.spent());
    CHECK_THROWS_AS(t.backward(loss), UsageError);
}

TEST_CASE("backward: non-scalar loss is a usage error") {
    Tensor w = Tensor::from_matrix(Matrix::Ones(2, 2), true);
    Tape t;
    Var v = t.leaf(w);
    CHECK_THROWS_AS(t.backward(v), UsageError);
}

TEST_CASE("backward: gradient accumulates across fan-out") {
    // loss = sum(w) + sum(w) => dw = 2
    Tensor w = Tensor::row({1.0, 2.0});
    w.requires_grad = true;
    Tape t;
    Var leaf = t.leaf(w);
    Var loss = add(sum(leaf), sum(leaf));
    t.backward(loss);
    REQUIRE(w.grad.has_value());
    CHECK((*w.grad)[0] == 2.0);
    CHECK((*w.grad)[1] == 2.0);
}

TEST_CASE("ops reject operands from different tapes") {
    Tape t1, t2;
    Var a = t1.constant(Tensor::row({1}));
    Var b = t2.constant(Tensor::row({1}));
    CHECK_THROWS_AS(add(a, b), UsageError);
}

TEST_CASE("non-finite forward values are an error state") {
    Tape t;
    Var a = t.constant(Tensor::row({1e308}));
    CHECK_THROWS_AS(scale(a, 10.0), Error);
    Var b = t.constant(Tensor::row({1e308}));
    CHECK_THROWS_AS(add(a, b), Error);
}
