#include "trifuse/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "trifuse/rng.hpp"

namespace trifuse {

std::string_view to_string(ModalityId m) {
    switch (m) {
        case ModalityId::Video: return "video";
        case ModalityId::Audio: return "audio";
        case ModalityId::Language: return "language";
    }
    throw UsageError("unknown modality id");
}

ModalityId parse_modality(std::string_view name) {
    for (ModalityId m : kAllModalities)
        if (name == to_string(m)) return m;
    throw DataError("unknown modality '" + std::string(name) + "'; expected video, audio or language");
}

std::vector<ModalityId> parse_modalities(std::string_view csv) {
    std::vector<ModalityId> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        std::string_view part = csv.substr(start, comma == std::string_view::npos ? csv.size() - start
                                                                                  : comma - start);
        if (!part.empty()) out.push_back(parse_modality(part));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return canonical_modalities(std::move(out));
}

std::vector<ModalityId> canonical_modalities(std::vector<ModalityId> mods) {
    std::sort(mods.begin(), mods.end());
    mods.erase(std::unique(mods.begin(), mods.end()), mods.end());
    if (mods.empty()) throw UsageError("modality set must not be empty");
    return mods;
}

std::string_view to_string(FusionStrategy s) {
    switch (s) {
        case FusionStrategy::Concatenation: return "concatenation";
        case FusionStrategy::UnifiedAttention: return "unified";
        case FusionStrategy::CombinatorialAttention: return "combinatorial";
    }
    throw UsageError("unknown strategy");
}

std::string_view display_name(FusionStrategy s) {
    switch (s) {
        case FusionStrategy::Concatenation: return "Concatenation";
        case FusionStrategy::UnifiedAttention: return "Unified Attention";
        case FusionStrategy::CombinatorialAttention: return "Combinatorial Attention";
    }
    throw UsageError("unknown strategy");
}

FusionStrategy parse_strategy(std::string_view name) {
    if (name == "concatenation") return FusionStrategy::Concatenation;
    if (name == "unified") return FusionStrategy::UnifiedAttention;
    if (name == "combinatorial") return FusionStrategy::CombinatorialAttention;
    throw UsageError("unknown strategy '" + std::string(name) +
                     "'; expected concatenation, unified or combinatorial");
}

std::vector<std::pair<ModalityId, ModalityId>> FusionModel::pairs() const {
    std::vector<std::pair<ModalityId, ModalityId>> out;
    for (std::size_t i = 0; i < modalities.size(); ++i)
        for (std::size_t j = i + 1; j < modalities.size(); ++j)
            out.emplace_back(modalities[i], modalities[j]);
    return out;
}

Index FusionModel::fused_width() const {
    switch (strategy) {
        case FusionStrategy::Concatenation:
        case FusionStrategy::UnifiedAttention: return token_count() * model_width;
        case FusionStrategy::CombinatorialAttention:
            return static_cast<Index>(pairs().size()) * model_width;
    }
    throw UsageError("unknown strategy");
}

std::vector<Tensor*> FusionModel::parameters() {
    std::vector<Tensor*> out;
    for (ModalityId m : modalities) {
        out.push_back(&projectors.at(m).weight);
        out.push_back(&projectors.at(m).bias);
    }
    for (AttentionUnit& u : attention) {
        out.push_back(&u.w_query);
        out.push_back(&u.w_key);
        out.push_back(&u.w_value);
    }
    out.push_back(&fc_weight);
    out.push_back(&fc_bias);
    out.push_back(&cls_weight);
    out.push_back(&cls_bias);
    return out;
}

std::vector<const Tensor*> FusionModel::parameters() const {
    auto mutable_params = const_cast<FusionModel*>(this)->parameters();
    return std::vector<const Tensor*>(mutable_params.begin(), mutable_params.end());
}

void FusionModel::set_requires_grad(bool on) {
    for (Tensor* p : parameters()) p->requires_grad = on;
}

namespace {

Tensor glorot(Rng& rng, Index rows, Index cols) {
    Scalar limit = std::sqrt(6.0 / static_cast<Scalar>(rows + cols));
    Array a(rows * cols);
    for (Index i = 0; i < a.size(); ++i) a[i] = rng.uniform(-limit, limit);
    return Tensor::from_flat({rows, cols}, std::move(a));
}

}  // namespace

FusionModel init_model(FusionStrategy strategy, std::vector<ModalityId> active, const FusionDims& dims,
                       std::uint64_t seed) {
    FusionModel m;
    m.strategy = strategy;
    m.modalities = canonical_modalities(std::move(active));
    if (dims.model_width <= 0 || dims.hidden_width <= 0)
        throw UsageError("init_model: model and hidden widths must be positive");
    m.model_width = dims.model_width;
    m.hidden_width = dims.hidden_width;
    for (ModalityId mod : m.modalities) {
        auto it = dims.modality_widths.find(mod);
        if (it == dims.modality_widths.end() || it->second <= 0)
            throw UsageError("init_model: missing or nonpositive width for modality " +
                             std::string(to_string(mod)));
        m.modality_widths[mod] = it->second;
    }
    if (strategy == FusionStrategy::CombinatorialAttention && m.token_count() < 2)
        throw UsageError("init_model: combinatorial attention needs at least two modalities");

    // one generator, parameters drawn in the documented order
    Rng rng(seed);
    for (ModalityId mod : m.modalities) {
        Index dm = m.modality_widths.at(mod);
        Projector p;
        p.weight = glorot(rng, dm, m.model_width);
        p.bias = Tensor::zeros({1, m.model_width});
        m.projectors[mod] = std::move(p);
        m.scalers[mod] = FeatureScaler{Vector::Zero(dm), Vector::Ones(dm)};
    }
    Index n_units = 0;
    if (strategy == FusionStrategy::UnifiedAttention) n_units = 1;
    if (strategy == FusionStrategy::CombinatorialAttention) n_units = static_cast<Index>(m.pairs().size());
    for (Index u = 0; u < n_units; ++u) {
        AttentionUnit unit;
        unit.w_query = glorot(rng, m.model_width, m.model_width);
        unit.w_key = glorot(rng, m.model_width, m.model_width);
        unit.w_value = glorot(rng, m.model_width, m.model_width);
        m.attention.push_back(std::move(unit));
    }
    m.fc_weight = glorot(rng, m.fused_width(), m.hidden_width);
    m.fc_bias = Tensor::zeros({1, m.hidden_width});
    m.cls_weight = glorot(rng, m.hidden_width, 2);
    m.cls_bias = Tensor::zeros({1, 2});
    return m;
}

// ---- forward ----

namespace {

BoundModel bind_impl(Tape& tape, const FusionModel& model, FusionModel* trainable) {
    BoundModel b;
    b.model = &model;
    auto wrap = [&](const Tensor& t) {
        return trainable ? tape.leaf(const_cast<Tensor&>(t)) : tape.constant(t);
    };
    for (ModalityId m : model.modalities) {
        const Projector& p = model.projectors.at(m);
        b.projectors[m] = {wrap(p.weight), wrap(p.bias)};
    }
    for (const AttentionUnit& u : model.attention)
        b.attention.push_back(AttentionVars{wrap(u.w_query), wrap(u.w_key), wrap(u.w_value)});
    b.fc_weight = wrap(model.fc_weight);
    b.fc_bias = wrap(model.fc_bias);
    b.cls_weight = wrap(model.cls_weight);
    b.cls_bias = wrap(model.cls_bias);
    return b;
}

void require_strategy(const BoundModel& bound, FusionStrategy expect, const char* op) {
    if (bound.model->strategy != expect)
        throw UsageError(std::string(op) + ": model strategy is " +
                         std::string(to_string(bound.model->strategy)) + ", expected " +
                         std::string(to_string(expect)));
}

}  // namespace

BoundModel bind(Tape& tape, FusionModel& model) { return bind_impl(tape, model, &model); }

BoundModel bind_frozen(Tape& tape, const FusionModel& model) { return bind_impl(tape, model, nullptr); }

Var project(Tape& tape, const BoundModel& bound, const FeatureMap& features) {
    const FusionModel& m = *bound.model;
    std::vector<Var> rows;
    for (ModalityId mod : m.modalities) {
        auto it = features.find(mod);
        if (it == features.end())
            throw DataError("project: missing feature vector for modality " + std::string(to_string(mod)));
        const Vector& x = it->second;
        Index dm = m.modality_widths.at(mod);
        if (x.size() != dm)
            throw DataError("project: modality " + std::string(to_string(mod)) + " has width " +
                            std::to_string(x.size()) + ", expected " + std::to_string(dm));
        const FeatureScaler& sc = m.scalers.at(mod);
        Vector scaled = (x - sc.shift).cwiseProduct(sc.scale);
        Var xv = tape.constant(Tensor::from_row(scaled));
        Var token = relu(add(matmul(xv, bound.projectors.at(mod).first), bound.projectors.at(mod).second));
        rows.push_back(token);
    }
    return rows.size() == 1 ? rows[0] : concat_rows(rows);
}

Var attend(Tape& tape, const AttentionVars& unit, const Var& tokens) {
    (void)tape;
    const Tensor& T = tokens.value();
    Index d = T.cols();
    if (unit.query.value().rows() != d)
        throw ShapeError("attend: token width " + std::to_string(d) + " does not match unit width " +
                         std::to_string(unit.query.value().rows()));
    Var q = matmul(tokens, unit.query);
    Var k = matmul(tokens, unit.key);
    Var v = matmul(tokens, unit.value);
    Var scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<Scalar>(d)));
    Var weights = softmax_rows(scores);
    return matmul(weights, v);
}

Var fuse_concat(Tape& tape, const BoundModel& bound, const Var& tokens) {
    (void)tape;
    require_strategy(bound, FusionStrategy::Concatenation, "fuse_concat");
    const Tensor& t = tokens.value();
    return reshape(tokens, 1, t.rows() * t.cols());
}

Var fuse_unified(Tape& tape, const BoundModel& bound, const Var& tokens) {
    require_strategy(bound, FusionStrategy::UnifiedAttention, "fuse_unified");
    Var attended = attend(tape, bound.attention.at(0), tokens);
    const Tensor& t = attended.value();
    return reshape(attended, 1, t.rows() * t.cols());
}

Var fuse_combinatorial(Tape& tape, const BoundModel& bound, const Var& tokens) {
    require_strategy(bound, FusionStrategy::CombinatorialAttention, "fuse_combinatorial");
    const FusionModel& m = *bound.model;
    Index t_count = tokens.value().rows();
    if (t_count < 2)
        throw UsageError("fuse_combinatorial: needs at least two modalities, got " + std::to_string(t_count));
    if (t_count != m.token_count())
        throw ShapeError("fuse_combinatorial: token count " + std::to_string(t_count) +
                         " does not match the model's modality count " + std::to_string(m.token_count()));
    std::vector<Var> pooled;
    std::size_t unit_idx = 0;
    for (std::size_t i = 0; i < m.modalities.size(); ++i) {
        for (std::size_t j = i + 1; j < m.modalities.size(); ++j) {
            Var stacked = concat_rows(row(tokens, static_cast<Index>(i)), row(tokens, static_cast<Index>(j)));
            Var attended = attend(tape, bound.attention.at(unit_idx++), stacked);
            pooled.push_back(mean_rows(attended));
        }
    }
    return pooled.size() == 1 ? pooled[0] : concat_cols(pooled);
}

Var fuse(Tape& tape, const BoundModel& bound, const Var& tokens) {
    switch (bound.model->strategy) {
        case FusionStrategy::Concatenation: return fuse_concat(tape, bound, tokens);
        case FusionStrategy::UnifiedAttention: return fuse_unified(tape, bound, tokens);
        case FusionStrategy::CombinatorialAttention: return fuse_combinatorial(tape, bound, tokens);
    }
    throw UsageError("unknown strategy");
}

Var classify_logits(Tape& tape, const BoundModel& bound, const Var& fused) {
    (void)tape;
    const FusionModel& m = *bound.model;
    if (fused.value().size() != m.fused_width())
        throw ShapeError("classify: fused length " + std::to_string(fused.value().size()) + ", expected " +
                         std::to_string(m.fused_width()));
    Var hidden = relu(add(matmul(fused, bound.fc_weight), bound.fc_bias));
    return add(matmul(hidden, bound.cls_weight), bound.cls_bias);
}

Var forward_logits(Tape& tape, const BoundModel& bound, const FeatureMap& features) {
    Var tokens = project(tape, bound, features);
    Var fused = fuse(tape, bound, tokens);
    return classify_logits(tape, bound, fused);
}

Prediction predict(const FusionModel& model, const FeatureMap& features) {
    Tape tape;
    BoundModel bound = bind_frozen(tape, model);
    Var logits = forward_logits(tape, bound, features);
    Prediction p;
    p.logits = logits.value().mat().row(0).transpose();
    Matrix probs = softmax_rows_value(logits.value().mat());
    p.probs = probs.row(0).transpose();
    return p;
}

}  // namespace trifuse
