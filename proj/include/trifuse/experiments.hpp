#pragma once

#include "trifuse/synth.hpp"
#include "trifuse/train.hpp"

namespace trifuse {

struct ExperimentConfig {
    FusionDims dims;
    int epochs = 100;
    double lr = 1e-3;
    double momentum = 0.9;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    bool standardize = true;
};

struct CellStats {
    double f1_micro = 0.0;
    double f1_macro = 0.0;
    double f1_weighted = 0.0;
};

struct ComparisonRow {
    FusionStrategy strategy;
    CellStats median;
    std::vector<EvalReport> per_seed;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;  // the three strategies
    std::vector<std::uint64_t> seeds;
};

// Trains all three fusion strategies on the same seed set (trimodal) and
// reports median F1 per strategy with per-seed detail.
ComparisonReport run_fusion_comparison(const DataSplit& data, const ExperimentConfig& cfg);

struct AblationRow {
    std::vector<ModalityId> modalities;
    CellStats median;
    std::vector<EvalReport> per_seed;
};

struct AblationReport {
    std::vector<AblationRow> rows;  // 3 unimodal, 3 bimodal, 1 trimodal
    std::vector<std::uint64_t> seeds;
};

// Concatenation-strategy models on every nonempty modality subset.
AblationReport run_modality_ablation(const DataSplit& data, const ExperimentConfig& cfg);

// the seven subsets in report order
std::vector<std::vector<ModalityId>> ablation_subsets();

double median(std::vector<double> values);

// deterministic renderings; the footer carries published full-scale
// reference scores for context (never asserted against)
std::string to_json(const ComparisonReport& r);
std::string to_text(const ComparisonReport& r);
std::string to_json(const AblationReport& r);
std::string to_text(const AblationReport& r);

}  // namespace trifuse
