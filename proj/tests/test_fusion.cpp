#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "trifuse/checkpoint.hpp"
#include "trifuse/fusion.hpp"
#include "trifuse/rng.hpp"

using namespace trifuse;

namespace {

Vector random_vector(Rng& rng, Index n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

FusionDims test_dims(Index d = 4, Index h = 8) {
    FusionDims dims;
    dims.model_width = d;
    dims.hidden_width = h;
    dims.modality_widths = {{ModalityId::Video, 6}, {ModalityId::Audio, 5}, {ModalityId::Language, 4}};
    return dims;
}

FeatureMap random_features(Rng& rng, const FusionModel& m) {
    FeatureMap f;
    for (ModalityId mod : m.modalities) f[mod] = random_vector(rng, m.modality_widths.at(mod));
    return f;
}

// direct arithmetic oracle: relu(x W + b) one modality row at a time
Vector project_row_oracle(const Vector& x, const Matrix& w, const Vector& b) {
    Vector out = Vector::Zero(w.cols());
    for (Index j = 0; j < w.cols(); ++j) {
        double acc = b[j];
        for (Index i = 0; i < w.rows(); ++i) acc += x[i] * w(i, j);
        out[j] = std::max(0.0, acc);
    }
    return out;
}

// explicit small-T oracle: scores -> softmax -> mix
Matrix attend_oracle(const Matrix& tokens, const Matrix& wq, const Matrix& wk, const Matrix& wv) {
    Matrix q = tokens * wq, k = tokens * wk, v = tokens * wv;
    Matrix scores = q * k.transpose() / std::sqrt(static_cast<double>(tokens.cols()));
    Matrix out(tokens.rows(), tokens.cols());
    for (Index r = 0; r < scores.rows(); ++r) {
        Eigen::ArrayXd e = (scores.row(r).array() - scores.row(r).maxCoeff()).exp();
        Eigen::ArrayXd w = e / e.sum();
        Eigen::RowVectorXd mix = Eigen::RowVectorXd::Zero(v.cols());
        for (Index c = 0; c < scores.cols(); ++c) mix += w[c] * v.row(c);
        out.row(r) = mix;
    }
    return out;
}

Matrix tokens_of(const FusionModel& m, const FeatureMap& f) {
    Tape tape;
    BoundModel b = bind_frozen(tape, m);
    return project(tape, b, f).value().mat();
}

}  // namespace

TEST_CASE("project: zero weights give zero tokens, identity passes through") {
    FusionModel m = init_model(FusionStrategy::Concatenation, {ModalityId::Video, ModalityId::Audio},
                               test_dims(), 1);
    for (ModalityId mod : m.modalities) m.projectors.at(mod).weight.flat().setZero();
    Rng rng(2);
    FeatureMap f = random_features(rng, m);
    CHECK((tokens_of(m, f).array() == 0.0).all());

    // square identity projector, zero bias, nonnegative input: relu passes the input through
    FusionDims dims;
    dims.model_width = 5;
    dims.hidden_width = 8;
    dims.modality_widths = {{ModalityId::Language, 5}};
    FusionModel um = init_model(FusionStrategy::Concatenation, {ModalityId::Language}, dims, 3);
    um.projectors.at(ModalityId::Language).weight.mat() = Matrix::Identity(5, 5);
    FeatureMap g{{ModalityId::Language, random_vector(rng, 5, 0.0, 1.0)}};
    Matrix t = tokens_of(um, g);
    CHECK(((t.row(0).transpose() - g.at(ModalityId::Language)).array().abs() < 1e-15).all());
}

TEST_CASE("project: matches affine+relu oracle, canonical row order") {
    Rng rng(7);
    FusionModel m = init_model(FusionStrategy::Concatenation, {ModalityId::Language, ModalityId::Video,
                               ModalityId::Audio}, test_dims(), 11);
    REQUIRE(m.modalities == std::vector<ModalityId>{ModalityId::Video, ModalityId::Audio, ModalityId::Language});
    FeatureMap f = random_features(rng, m);
    Matrix t = tokens_of(m, f);
    Index r = 0;
    for (ModalityId mod : m.modalities) {
        Vector expect = project_row_oracle(f.at(mod), m.projectors.at(mod).weight.mat(),
                                           m.projectors.at(mod).bias.mat().row(0).transpose());
        CHECK(((t.row(r).transpose() - expect).array().abs() < 1e-12).all());
        ++r;
    }
}

TEST_CASE("project: missing or mis-sized modality errors name the modality") {
    FusionModel m = init_model(FusionStrategy::Concatenation, {ModalityId::Video, ModalityId::Audio},
                               test_dims(), 1);
    Tape tape;
    BoundModel b = bind_frozen(tape, m);
    FeatureMap missing{{ModalityId::Video, Vector::Zero(6)}};
    CHECK_THROWS_WITH_AS(project(tape, b, missing), doctest::Contains("audio"), DataError);
    FeatureMap wrong{{ModalityId::Video, Vector::Zero(6)}, {ModalityId::Audio, Vector::Zero(9)}};
    CHECK_THROWS_WITH_AS(project(tape, b, wrong), doctest::Contains("audio"), DataError);
}

TEST_CASE("attend: single token degenerates to x Wv") {
    Rng rng(5);
    Index d = 4;
    Matrix wq(d, d), wk(d, d), wv(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            wq(i, j) = rng.uniform(-1, 1);
            wk(i, j) = rng.uniform(-1, 1);
            wv(i, j) = rng.uniform(-1, 1);
        }
    Matrix x(1, d);
    for (Index j = 0; j < d; ++j) x(0, j) = rng.uniform(-1, 1);

    Tape tape;
    AttentionVars unit{tape.constant(Tensor::from_matrix(wq)), tape.constant(Tensor::from_matrix(wk)),
                       tape.constant(Tensor::from_matrix(wv))};
    Matrix out = attend(tape, unit, tape.constant(Tensor::from_matrix(x))).value().mat();
    Matrix expect = x * wv;
    CHECK(((out - expect).array().abs() < 1e-14).all());
}

TEST_CASE("attend: zero query/key weights give uniform mixing") {
    Rng rng(6);
    Index t_count = 3, d = 4;
    Matrix tokens(t_count, d), wv(d, d);
    for (Index i = 0; i < t_count; ++i)
        for (Index j = 0; j < d; ++j) tokens(i, j) = rng.uniform(-1, 1);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) wv(i, j) = rng.uniform(-1, 1);

    Tape tape;
    AttentionVars unit{tape.constant(Tensor::zeros({d, d})), tape.constant(Tensor::zeros({d, d})),
                       tape.constant(Tensor::from_matrix(wv))};
    Matrix out = attend(tape, unit, tape.constant(Tensor::from_matrix(tokens))).value().mat();
    Matrix mixed = tokens * wv;
    Eigen::RowVectorXd mean = mixed.colwise().mean();
    for (Index r = 0; r < t_count; ++r) CHECK(((out.row(r) - mean).array().abs() < 1e-14).all());
}

TEST_CASE("attend: T=2 random matches the step-by-step oracle") {
    Rng rng(8);
    Index d = 5;
    auto rmat = [&](Index r, Index c) {
        Matrix m(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-1, 1);
        return m;
    };
    for (int it = 0; it < 10; ++it) {
        Matrix tokens = rmat(2, d), wq = rmat(d, d), wk = rmat(d, d), wv = rmat(d, d);
        Tape tape;
        AttentionVars unit{tape.constant(Tensor::from_matrix(wq)), tape.constant(Tensor::from_matrix(wk)),
                           tape.constant(Tensor::from_matrix(wv))};
        Matrix out = attend(tape, unit, tape.constant(Tensor::from_matrix(tokens))).value().mat();
        CHECK(((out - attend_oracle(tokens, wq, wk, wv)).array().abs() < 1e-12).all());
    }
}

TEST_CASE("attention weights rows sum to one") {
    Rng rng(9);
    for (Index t_count : {1, 2, 3}) {
        Index d = 4;
        Matrix tokens(t_count, d), wq(d, d), wk(d, d);
        for (Index i = 0; i < t_count; ++i)
            for (Index j = 0; j < d; ++j) tokens(i, j) = rng.uniform(-2, 2);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) {
                wq(i, j) = rng.uniform(-1, 1);
                wk(i, j) = rng.uniform(-1, 1);
            }
        Tape tape;
        Var tv = tape.constant(Tensor::from_matrix(tokens));
        Var scores = scale(matmul(matmul(tv, tape.constant(Tensor::from_matrix(wq))),
                                  transpose(matmul(tv, tape.constant(Tensor::from_matrix(wk))))),
                           1.0 / std::sqrt(static_cast<double>(d)));
        Matrix w = softmax_rows(scores).value().mat();
        for (Index r = 0; r < t_count; ++r) CHECK(std::abs(w.row(r).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("fuse_concat flattens tokens in canonical order") {
    FusionDims dims;
    dims.model_width = 2;
    dims.hidden_width = 4;
    dims.modality_widths = {{ModalityId::Video, 2}, {ModalityId::Audio, 2}};
    FusionModel m = init_model(FusionStrategy::Concatenation, {ModalityId::Video, ModalityId::Audio}, dims, 1);
    Tape tape;
    BoundModel b = bind_frozen(tape, m);
    Matrix tokens(2, 2);
    tokens << 1, 2, 3, 4;
    Var fused = fuse_concat(tape, b, tape.constant(Tensor::from_matrix(tokens)));
    CHECK(fused.value().shape() == Shape{1, 4});
    CHECK(fused.value()(0, 0) == 1.0);
    CHECK(fused.value()(0, 1) == 2.0);
    CHECK(fused.value()(0, 2) == 3.0);
    CHECK(fused.value()(0, 3) == 4.0);

    // wrong strategy is a usage error
    FusionModel u = init_model(FusionStrategy::UnifiedAttention, {ModalityId::Video, ModalityId::Audio}, dims, 1);
    Tape t2;
    BoundModel bu = bind_frozen(t2, u);
    CHECK_THROWS_AS(fuse_concat(t2, bu, t2.constant(Tensor::from_matrix(tokens))), UsageError);
}

TEST_CASE("fuse_concat unimodal passes the single token through") {
    FusionDims dims;
    dims.model_width = 3;
    dims.hidden_width = 4;
    dims.modality_widths = {{ModalityId::Audio, 3}};
    FusionModel m = init_model(FusionStrategy::Concatenation, {ModalityId::Audio}, dims, 2);
    Rng rng(3);
    FeatureMap f{{ModalityId::Audio, random_vector(rng, 3)}};
    Tape tape;
    BoundModel b = bind_frozen(tape, m);
    Var tokens = project(tape, b, f);
    Var fused = fuse_concat(tape, b, tokens);
    CHECK(fused.value().shape() == Shape{1, 3});
    CHECK(((fused.value().mat() - tokens.value().mat()).array().abs() == 0.0).all());
}

TEST_CASE("fuse_unified degenerate and oracle cases") {
    // T=1 reduces to x Wv flattened
    FusionDims dims;
    dims.model_width = 4;
    dims.hidden_width = 8;
    dims.modality_widths = {{ModalityId::Video, 4}};
    FusionModel m = init_model(FusionStrategy::UnifiedAttention, {ModalityId::Video}, dims, 5);
    Rng rng(10);
    Matrix x(1, 4);
    for (Index j = 0; j < 4; ++j) x(0, j) = rng.uniform(-1, 1);
    Tape tape;
    BoundModel b = bind_frozen(tape, m);
    Var fused = fuse_unified(tape, b, tape.constant(Tensor::from_matrix(x)));
    Matrix expect = x * m.attention[0].w_value.mat();
    CHECK(fused.value().shape() == Shape{1, 4});
    CHECK(((fused.value().mat() - expect).array().abs() < 1e-14).all());

    // zero Q/K with identical rows: all output rows identical
    FusionModel tri = init_model(FusionStrategy::UnifiedAttention,
                                 {ModalityId::Video, ModalityId::Audio, ModalityId::Language}, test_dims(), 6);
    tri.attention[0].w_query.flat().setZero();
    tri.attention[0].w_key.flat().setZero();
    Matrix same(3, 4);
    same << 1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3, 4;
    Tape t2;
    BoundModel b2 = bind_frozen(t2, tri);
    Var f2 = fuse_unified(t2, b2, t2.constant(Tensor::from_matrix(same)));
    Matrix rowview = ConstMatrixMap(f2.value().data(), 3, 4);
    CHECK(((rowview.row(0) - rowview.row(1)).array().abs() < 1e-14).all());
    CHECK(((rowview.row(1) - rowview.row(2)).array().abs() < 1e-14).all());

    // trimodal random equals compose(attend, flatten)
    Rng rng2(12);
    FusionModel tr = init_model(FusionStrategy::UnifiedAttention,
                                {ModalityId::Video, ModalityId::Audio, ModalityId::Language}, test_dims(), 13);
    FeatureMap feats = random_features(rng2, tr);
    Matrix tokens = tokens_of(tr, feats);
    Matrix att = attend_oracle(tokens, tr.attention[0].w_query.mat(), tr.attention[0].w_key.mat(),
                               tr.attention[0].w_value.mat());
    Tape t3;
    BoundModel b3 = bind_frozen(t3, tr);
    Var got = fuse_unified(t3, b3, project(t3, b3, feats));
    ConstMatrixMap flat(att.data(), 1, att.size());
    CHECK(((got.value().mat() - flat).array().abs() < 1e-12).all());
}

TEST_CASE("fuse_combinatorial widths, ordering invariance and oracle") {
    // bimodal: one pair, output length d
    FusionDims dims = test_dims();
    FusionModel bi = init_model(FusionStrategy::CombinatorialAttention, {ModalityId::Video, ModalityId::Audio},
                                dims, 21);
    Rng rng(22);
    FeatureMap bif = random_features(rng, bi);
    Tape tape;
    BoundModel bb = bind_frozen(tape, bi);
    Var bfused = fuse_combinatorial(tape, bb, project(tape, bb, bif));
    CHECK(bfused.value().shape() == Shape{1, 4});

    // trimodal: three pairs, output length 3d, insertion order of the map is irrelevant
    FusionModel tri = init_model(FusionStrategy::CombinatorialAttention,
                                 {ModalityId::Video, ModalityId::Audio, ModalityId::Language}, dims, 23);
    FeatureMap f1, f2;
    Vector xv = random_vector(rng, 6), xa = random_vector(rng, 5), xl = random_vector(rng, 4);
    f1[ModalityId::Video] = xv;
    f1[ModalityId::Audio] = xa;
    f1[ModalityId::Language] = xl;
    f2[ModalityId::Language] = xl;
    f2[ModalityId::Audio] = xa;
    f2[ModalityId::Video] = xv;
    Tape ta, tb;
    BoundModel ba = bind_frozen(ta, tri), bb2 = bind_frozen(tb, tri);
    Var fa = fuse_combinatorial(ta, ba, project(ta, ba, f1));
    Var fb = fuse_combinatorial(tb, bb2, project(tb, bb2, f2));
    CHECK(fa.value().shape() == Shape{1, 12});
    CHECK((fa.value().flat() == fb.value().flat()).all());

    // per-pair attend + mean oracle, distinct units per pair
    Matrix tokens = tokens_of(tri, f1);
    std::vector<std::pair<Index, Index>> pair_rows{{0, 1}, {0, 2}, {1, 2}};
    Vector expect(12);
    for (std::size_t p = 0; p < pair_rows.size(); ++p) {
        Matrix stacked(2, 4);
        stacked.row(0) = tokens.row(pair_rows[p].first);
        stacked.row(1) = tokens.row(pair_rows[p].second);
        Matrix att = attend_oracle(stacked, tri.attention[p].w_query.mat(), tri.attention[p].w_key.mat(),
                                   tri.attention[p].w_value.mat());
        expect.segment(static_cast<Index>(p) * 4, 4) = 0.5 * (att.row(0) + att.row(1)).transpose();
    }
    CHECK(((fa.value().mat().row(0).transpose() - expect).array().abs() < 1e-12).all());
}

TEST_CASE("fuse_combinatorial rejects a single token") {
    FusionDims dims = test_dims();
    FusionModel bi = init_model(FusionStrategy::CombinatorialAttention, {ModalityId::Video, ModalityId::Audio},
                                dims, 2);
    Tape tape;
    BoundModel b = bind_frozen(tape, bi);
    CHECK_THROWS_AS(fuse_combinatorial(tape, b, tape.constant(Tensor::zeros({1, 4}))), UsageError);
    CHECK_THROWS_AS(init_model(FusionStrategy::CombinatorialAttention, {ModalityId::Video}, dims, 2), UsageError);
}

TEST_CASE("classify: zero weights and probability normalization") {
    FusionModel m = init_model(FusionStrategy::Concatenation,
                               {ModalityId::Video, ModalityId::Audio, ModalityId::Language}, test_dims(), 31);
    for (Tensor* p : m.parameters()) p->flat().setZero();
    Rng rng(32);
    FeatureMap f = random_features(rng, m);
    Prediction pred = predict(m, f);
    CHECK(pred.logits[0] == 0.0);
    CHECK(pred.logits[1] == 0.0);
    CHECK(pred.probs[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(pred.probs[1] == doctest::Approx(0.5).epsilon(1e-14));

    for (int it = 0; it < 10; ++it) {
        FusionModel r = init_model(FusionStrategy::Concatenation,
                                   {ModalityId::Video, ModalityId::Audio, ModalityId::Language}, test_dims(),
                                   100 + static_cast<std::uint64_t>(it));
        Prediction pr = predict(r, random_features(rng, r));
        CHECK(std::abs(pr.probs.sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("classify: random case matches affine/relu/affine/softmax oracle") {
    Rng rng(33);
    FusionModel m = init_model(FusionStrategy::Concatenation,
                               {ModalityId::Video, ModalityId::Audio, ModalityId::Language}, test_dims(), 34);
    FeatureMap f = random_features(rng, m);
    Matrix tokens = tokens_of(m, f);
    ConstMatrixMap fused(tokens.data(), 1, tokens.size());
    Eigen::RowVectorXd hidden = (fused * m.fc_weight.mat() + m.fc_bias.mat()).cwiseMax(0.0);
    Eigen::RowVectorXd logits = hidden * m.cls_weight.mat() + m.cls_bias.mat();
    Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
    Eigen::ArrayXd probs = e / e.sum();
    Prediction pred = predict(m, f);
    CHECK(std::abs(pred.logits[0] - logits[0]) < 1e-12);
    CHECK(std::abs(pred.logits[1] - logits[1]) < 1e-12);
    CHECK(std::abs(pred.probs[0] - probs[0]) < 1e-12);

    // fused length mismatch is a dimension error
    Tape tape;
    BoundModel b = bind_frozen(tape, m);
    CHECK_THROWS_AS(classify_logits(tape, b, tape.constant(Tensor::zeros({1, 5}))), ShapeError);
}

TEST_CASE("init_model: determinism, zero biases, empty set rejection") {
    FusionDims dims = test_dims();
    FusionModel a = init_model(FusionStrategy::CombinatorialAttention,
                               {ModalityId::Video, ModalityId::Audio, ModalityId::Language}, dims, 77);
    FusionModel b = init_model(FusionStrategy::CombinatorialAttention,
                               {ModalityId::Video, ModalityId::Audio, ModalityId::Language}, dims, 77);
    auto pa = a.parameters(), pb = b.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i)
        CHECK(std::memcmp(pa[i]->data(), pb[i]->data(), sizeof(Scalar) * static_cast<std::size_t>(pa[i]->size())) == 0);

    CHECK((a.fc_bias.flat() == 0.0).all());
    CHECK((a.cls_bias.flat() == 0.0).all());
    for (ModalityId mod : a.modalities) CHECK((a.projectors.at(mod).bias.flat() == 0.0).all());

    CHECK_THROWS_AS(init_model(FusionStrategy::Concatenation, {}, dims, 1), UsageError);

    // different seeds give different weights
    FusionModel c = init_model(FusionStrategy::CombinatorialAttention,
                               {ModalityId::Video, ModalityId::Audio, ModalityId::Language}, dims, 78);
    CHECK((a.fc_weight.flat() != c.fc_weight.flat()).any());
}

TEST_CASE("init_model: weight sample mean near zero") {
    FusionDims dims;
    dims.model_width = 100;
    dims.hidden_width = 4;
    dims.modality_widths = {{ModalityId::Video, 100}};
    FusionModel m = init_model(FusionStrategy::Concatenation, {ModalityId::Video}, dims, 4242);
    const Tensor& w = m.projectors.at(ModalityId::Video).weight;  // 10^4 draws
    double limit = std::sqrt(6.0 / 200.0);
    double mean = w.flat().mean();
    double sigma = limit / std::sqrt(3.0) / std::sqrt(static_cast<double>(w.size()));
    CHECK(std::abs(mean) < 3.0 * sigma);
}

TEST_CASE("fused width formulas per modality subset") {
    FusionDims dims = test_dims();
    std::vector<std::vector<ModalityId>> subsets{
        {ModalityId::Video},
        {ModalityId::Audio},
        {ModalityId::Language},
        {ModalityId::Video, ModalityId::Audio},
        {ModalityId::Video, ModalityId::Language},
        {ModalityId::Audio, ModalityId::Language},
        {ModalityId::Video, ModalityId::Audio, ModalityId::Language}};
    for (const auto& sub : subsets) {
        Index t_count = static_cast<Index>(sub.size());
        FusionModel c = init_model(FusionStrategy::Concatenation, sub, dims, 1);
        CHECK(c.fused_width() == t_count * 4);
        FusionModel u = init_model(FusionStrategy::UnifiedAttention, sub, dims, 1);
        CHECK(u.fused_width() == t_count * 4);
        if (t_count >= 2) {
            FusionModel k = init_model(FusionStrategy::CombinatorialAttention, sub, dims, 1);
            CHECK(k.fused_width() == (t_count * (t_count - 1) / 2) * 4);
        }
    }
}

TEST_CASE("end-to-end gradients match finite differences for every strategy") {
    const double step = 1e-5, tol = 1e-4;
    for (FusionStrategy strategy : {FusionStrategy::Concatenation, FusionStrategy::UnifiedAttention,
                                    FusionStrategy::CombinatorialAttention}) {
        Rng rng(900 + static_cast<std::uint64_t>(strategy));
        for (int draw = 0; draw < 3; ++draw) {
            FusionModel m = init_model(strategy, {ModalityId::Video, ModalityId::Audio, ModalityId::Language},
                                       test_dims(), rng.next());
            m.set_requires_grad(true);
            FeatureMap f = random_features(rng, m);
            int label = static_cast<int>(rng.below(2));

            Tape tape;
            BoundModel bound = bind(tape, m);
            Var loss = cross_entropy_logits(forward_logits(tape, bound, f), label);
            tape.backward(loss);

            auto loss_value = [&]() {
                Tape t;
                BoundModel bf = bind_frozen(t, m);
                return cross_entropy_logits(forward_logits(t, bf, f), label).value().item();
            };
            for (Tensor* p : m.parameters()) {
                REQUIRE(p->grad.has_value());
                for (Index k = 0; k < p->size(); ++k) {
                    double orig = p->flat()[k];
                    p->flat()[k] = orig + step;
                    double up = loss_value();
                    p->flat()[k] = orig - step;
                    double down = loss_value();
                    p->flat()[k] = orig;
                    double fd = (up - down) / (2 * step);
                    double an = (*p->grad)[k];
                    double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-2});
                    INFO("strategy ", static_cast<int>(strategy), " draw ", draw, " index ", k);
                    CHECK(rel < tol);
                }
            }
        }
    }
}

TEST_CASE("checkpoint: save/load round trip is bit-exact") {
    namespace fs = std::filesystem;
    Rng rng(55);
    fs::path dir = fs::temp_directory_path() / "trifuse_ckpt_test";
    fs::create_directories(dir);
    for (FusionStrategy strategy : {FusionStrategy::Concatenation, FusionStrategy::UnifiedAttention,
                                    FusionStrategy::CombinatorialAttention}) {
        FusionModel m = init_model(strategy, {ModalityId::Video, ModalityId::Audio, ModalityId::Language},
                                   test_dims(), rng.next());
        // non-trivial scaler so it round-trips too
        m.scalers.at(ModalityId::Audio).shift.setConstant(0.25);
        m.scalers.at(ModalityId::Audio).scale.setConstant(1.0 / 3.0);
        fs::path file = dir / ("m" + std::to_string(static_cast<int>(strategy)) + ".json");
        save_checkpoint(m, file);
        FusionModel loaded = load_checkpoint(file);

        CHECK(loaded.strategy == m.strategy);
        CHECK(loaded.modalities == m.modalities);
        auto pa = m.parameters(), pb = loaded.parameters();
        REQUIRE(pa.size() == pb.size());
        for (std::size_t i = 0; i < pa.size(); ++i) {
            REQUIRE(pa[i]->shape() == pb[i]->shape());
            CHECK(std::memcmp(pa[i]->data(), pb[i]->data(),
                              sizeof(Scalar) * static_cast<std::size_t>(pa[i]->size())) == 0);
        }
        for (ModalityId mod : m.modalities) {
            CHECK((loaded.scalers.at(mod).shift.array() == m.scalers.at(mod).shift.array()).all());
            CHECK((loaded.scalers.at(mod).scale.array() == m.scalers.at(mod).scale.array()).all());
        }

        // save(load(file)) reproduces the bytes
        fs::path file2 = dir / "again.json";
        save_checkpoint(loaded, file2);
        std::ifstream a(file, std::ios::binary), b2(file2, std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b2)), std::istreambuf_iterator<char>());
        CHECK(sa == sb);
    }
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), DataError);
}
