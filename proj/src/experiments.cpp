#include "trifuse/experiments.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

namespace trifuse {

namespace {

using nlohmann::json;

// published full-scale reference scores, shown in footers for context
struct Reference {
    const char* name;
    double micro, macro, weighted;
};

constexpr Reference kComparisonReference[] = {
    {"Concatenation", 0.82, 0.81, 0.82},
    {"Unified Attention", 0.82, 0.81, 0.82},
    {"Combinatorial Attention", 0.83, 0.82, 0.83},
};

constexpr Reference kAblationReference[] = {
    {"TriModal", 0.82, 0.81, 0.82},
    {"Language and Video", 0.81, 0.80, 0.81},
    {"Audio", 0.61, 0.38, 0.46},
};

constexpr const char* kReferenceNote = "reference (full-scale corpus, pretrained backbones):";

CellStats medians(const std::vector<EvalReport>& reports) {
    std::vector<double> micro, macro, weighted;
    for (const EvalReport& r : reports) {
        micro.push_back(r.f1_micro);
        macro.push_back(r.f1_macro);
        weighted.push_back(r.f1_weighted);
    }
    return CellStats{median(micro), median(macro), median(weighted)};
}

std::vector<EvalReport> run_cell(const DataSplit& data, const ExperimentConfig& cfg,
                                 FusionStrategy strategy, const std::vector<ModalityId>& modalities) {
    std::vector<EvalReport> reports;
    for (std::uint64_t seed : cfg.seeds) {
        TrainConfig tc;
        tc.strategy = strategy;
        tc.modalities = modalities;
        tc.epochs = cfg.epochs;
        tc.lr = cfg.lr;
        tc.momentum = cfg.momentum;
        tc.seed = seed;
        tc.dims = cfg.dims;
        tc.standardize = cfg.standardize;
        TrainResult tr = train(tc, data.train);
        reports.push_back(evaluate(tr.model, data.test));
    }
    return reports;
}

json seed_detail(const std::vector<std::uint64_t>& seeds, const std::vector<EvalReport>& reports) {
    json arr = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        json e;
        e["seed"] = seeds[i];
        e["f1_micro"] = reports[i].f1_micro;
        e["f1_macro"] = reports[i].f1_macro;
        e["f1_weighted"] = reports[i].f1_weighted;
        arr.push_back(e);
    }
    return arr;
}

json reference_json(const Reference* refs, std::size_t n) {
    json arr = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        json e;
        e["name"] = refs[i].name;
        e["f1_micro"] = refs[i].micro;
        e["f1_macro"] = refs[i].macro;
        e["f1_weighted"] = refs[i].weighted;
        arr.push_back(e);
    }
    return arr;
}

std::string reference_text(const Reference* refs, std::size_t n) {
    std::string out = std::string(kReferenceNote) + "\n";
    char buf[128];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "  %-24s %.2f / %.2f / %.2f\n", refs[i].name, refs[i].micro,
                      refs[i].macro, refs[i].weighted);
        out += buf;
    }
    return out;
}

std::string modality_set_name(const std::vector<ModalityId>& mods) {
    std::string out;
    for (ModalityId m : mods) {
        if (!out.empty()) out += "+";
        out += to_string(m);
    }
    return out;
}

std::string seeds_line(const std::vector<std::uint64_t>& seeds) {
    std::string out = "seeds:";
    for (std::uint64_t s : seeds) out += " " + std::to_string(s);
    return out + "\n";
}

}  // namespace

double median(std::vector<double> values) {
    if (values.empty()) throw UsageError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<std::vector<ModalityId>> ablation_subsets() {
    using M = ModalityId;
    return {
        {M::Video},          {M::Audio},          {M::Language},
        {M::Video, M::Audio}, {M::Video, M::Language}, {M::Audio, M::Language},
        {M::Video, M::Audio, M::Language},
    };
}

ComparisonReport run_fusion_comparison(const DataSplit& data, const ExperimentConfig& cfg) {
    const std::vector<ModalityId> all(kAllModalities.begin(), kAllModalities.end());
    ComparisonReport out;
    out.seeds = cfg.seeds;
    for (FusionStrategy s : {FusionStrategy::Concatenation, FusionStrategy::UnifiedAttention,
                             FusionStrategy::CombinatorialAttention}) {
        ComparisonRow row;
        row.strategy = s;
        row.per_seed = run_cell(data, cfg, s, all);
        row.median = medians(row.per_seed);
        out.rows.push_back(std::move(row));
    }
    return out;
}

AblationReport run_modality_ablation(const DataSplit& data, const ExperimentConfig& cfg) {
    AblationReport out;
    out.seeds = cfg.seeds;
    for (const std::vector<ModalityId>& subset : ablation_subsets()) {
        AblationRow row;
        row.modalities = subset;
        row.per_seed = run_cell(data, cfg, FusionStrategy::Concatenation, subset);
        row.median = medians(row.per_seed);
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string to_json(const ComparisonReport& r) {
    json j;
    j["kind"] = "fusion_comparison";
    j["seeds"] = r.seeds;
    json rows = json::array();
    for (const ComparisonRow& row : r.rows) {
        json e;
        e["strategy"] = to_string(row.strategy);
        e["f1_micro"] = row.median.f1_micro;
        e["f1_macro"] = row.median.f1_macro;
        e["f1_weighted"] = row.median.f1_weighted;
        e["per_seed"] = seed_detail(r.seeds, row.per_seed);
        rows.push_back(e);
    }
    j["rows"] = rows;
    j["reference"] = reference_json(kComparisonReference, 3);
    return j.dump(1);
}

std::string to_text(const ComparisonReport& r) {
    std::string out = "fusion strategy comparison (median over seeds, held-out split)\n\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-24s %9s %9s %12s\n", "strategy", "F1-micro", "F1-macro",
                  "F1-weighted");
    out += buf;
    for (const ComparisonRow& row : r.rows) {
        std::snprintf(buf, sizeof(buf), "%-24s %9.4f %9.4f %12.4f\n",
                      std::string(display_name(row.strategy)).c_str(), row.median.f1_micro,
                      row.median.f1_macro, row.median.f1_weighted);
        out += buf;
    }
    out += "\n" + seeds_line(r.seeds) + "\n";
    out += reference_text(kComparisonReference, 3);
    return out;
}

std::string to_json(const AblationReport& r) {
    json j;
    j["kind"] = "modality_ablation";
    j["seeds"] = r.seeds;
    json rows = json::array();
    for (const AblationRow& row : r.rows) {
        json e;
        std::vector<std::string> mods;
        for (ModalityId m : row.modalities) mods.emplace_back(to_string(m));
        e["modalities"] = mods;
        e["f1_micro"] = row.median.f1_micro;
        e["f1_macro"] = row.median.f1_macro;
        e["f1_weighted"] = row.median.f1_weighted;
        e["per_seed"] = seed_detail(r.seeds, row.per_seed);
        rows.push_back(e);
    }
    j["rows"] = rows;
    j["reference"] = reference_json(kAblationReference, 3);
    return j.dump(1);
}

std::string to_text(const AblationReport& r) {
    std::string out = "modality ablation, concatenation strategy (median over seeds, held-out split)\n\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-24s %9s %9s %12s\n", "modalities", "F1-micro", "F1-macro",
                  "F1-weighted");
    out += buf;
    for (const AblationRow& row : r.rows) {
        std::snprintf(buf, sizeof(buf), "%-24s %9.4f %9.4f %12.4f\n",
                      modality_set_name(row.modalities).c_str(), row.median.f1_micro, row.median.f1_macro,
                      row.median.f1_weighted);
        out += buf;
    }
    out += "\n" + seeds_line(r.seeds) + "\n";
    out += reference_text(kAblationReference, 3);
    return out;
}

}  // namespace trifuse
