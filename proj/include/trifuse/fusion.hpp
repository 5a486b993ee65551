#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "trifuse/autograd.hpp"
#include "trifuse/modality.hpp"
#include "trifuse/tensor.hpp"

namespace trifuse {

enum class FusionStrategy { Concatenation, UnifiedAttention, CombinatorialAttention };

std::string_view to_string(FusionStrategy s);
// accepts "concatenation" | "unified" | "combinatorial"
FusionStrategy parse_strategy(std::string_view name);
// display name, e.g. "Unified Attention"
std::string_view display_name(FusionStrategy s);

// Scaled dot-product self-attention projections, all d x d.
struct AttentionUnit {
    Tensor w_query;
    Tensor w_key;
    Tensor w_value;
};

// Per-modality affine map into the common model width.
struct Projector {
    Tensor weight;  // d_m x d
    Tensor bias;    // 1 x d
};

// Fixed (untrained) per-feature affine normalization applied before
// projection: x' = (x - shift) .* scale. Identity by default; the trainer
// fits it to the training set so raw extractor scales cannot destabilize
// optimization.
struct FeatureScaler {
    Vector shift;
    Vector scale;
};

using FeatureMap = std::map<ModalityId, Vector>;

struct FusionModel {
    FusionStrategy strategy = FusionStrategy::Concatenation;
    std::vector<ModalityId> modalities;  // canonical order
    Index model_width = 0;               // d
    Index hidden_width = 0;              // h
    std::map<ModalityId, Index> modality_widths;

    std::map<ModalityId, Projector> projectors;
    std::map<ModalityId, FeatureScaler> scalers;
    // 0 units (Concatenation), 1 (Unified), one per modality pair (Combinatorial)
    std::vector<AttentionUnit> attention;
    Tensor fc_weight;   // f_in x h
    Tensor fc_bias;     // 1 x h
    Tensor cls_weight;  // h x 2
    Tensor cls_bias;    // 1 x 2

    Index token_count() const { return static_cast<Index>(modalities.size()); }
    // unordered modality pairs in canonical order
    std::vector<std::pair<ModalityId, ModalityId>> pairs() const;
    // width of the fused vector entering the fully connected layer
    Index fused_width() const;

    // trainable parameters in a fixed, documented order: projectors in
    // canonical modality order (weight, bias), attention units in unit
    // order (query, key, value), then fc and classifier
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    void set_requires_grad(bool on);
};

struct FusionDims {
    Index model_width = 16;
    Index hidden_width = 64;
    std::map<ModalityId, Index> modality_widths;
};

// Glorot-uniform weights from the seeded generator, zero biases, identity
// scalers. Identical (strategy, modalities, dims, seed) give bit-identical
// parameters.
FusionModel init_model(FusionStrategy strategy, std::vector<ModalityId> active, const FusionDims& dims,
                       std::uint64_t seed);

// ---- recorded forward pass ----

struct AttentionVars {
    Var query, key, value;
};

// Per-pass view of a model's parameters as tape nodes.
struct BoundModel {
    const FusionModel* model = nullptr;
    std::map<ModalityId, std::pair<Var, Var>> projectors;  // weight, bias
    std::vector<AttentionVars> attention;
    Var fc_weight, fc_bias, cls_weight, cls_bias;
};

// trainable leaves: backward() fills the model's grad buffers
BoundModel bind(Tape& tape, FusionModel& model);
// read-only constants for inference
BoundModel bind_frozen(Tape& tape, const FusionModel& model);

// token matrix T x d, row m = relu(x_m W_m + b_m) in canonical order
Var project(Tape& tape, const BoundModel& bound, const FeatureMap& features);

// softmax_rows((T Wq)(T Wk)^T / sqrt(d)) (T Wv)
Var attend(Tape& tape, const AttentionVars& unit, const Var& tokens);

Var fuse_concat(Tape& tape, const BoundModel& bound, const Var& tokens);
Var fuse_unified(Tape& tape, const BoundModel& bound, const Var& tokens);
Var fuse_combinatorial(Tape& tape, const BoundModel& bound, const Var& tokens);
// dispatch on the model's strategy
Var fuse(Tape& tape, const BoundModel& bound, const Var& tokens);

// relu(fused W_fc + b_fc) W_cls + b_cls
Var classify_logits(Tape& tape, const BoundModel& bound, const Var& fused);

// full forward: project -> fuse -> classify
Var forward_logits(Tape& tape, const BoundModel& bound, const FeatureMap& features);

struct Prediction {
    Vector logits;  // length 2
    Vector probs;   // softmax of logits, sums to 1
};

// single-pass inference on a frozen model
Prediction predict(const FusionModel& model, const FeatureMap& features);

}  // namespace trifuse
