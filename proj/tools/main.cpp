#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>

#include <json.hpp>

#include "trifuse/checkpoint.hpp"
#include "trifuse/dataset.hpp"
#include "trifuse/experiments.hpp"
#include "trifuse/extract.hpp"
#include "trifuse/io.hpp"
#include "trifuse/log.hpp"
#include "trifuse/pipeline.hpp"
#include "trifuse/synth.hpp"
#include "trifuse/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trifuse;

namespace {

// --config FILE merging: any option not set on the command line takes its
// value from the JSON key named after the flag (dashes become underscores)
class ConfigMerge {
public:
    explicit ConfigMerge(CLI::App* cmd) {
        cmd->add_option("--config", path_, "JSON config file; explicit flags override its keys");
    }

    template <typename T>
    void bind(CLI::Option* opt, T& var, const std::string& key) {
        appliers_.emplace_back([opt, &var, key](const json& j) {
            if (opt->count() == 0 && j.contains(key)) var = j.at(key).get<T>();
        });
    }

    void apply() const {
        if (path_.empty()) return;
        std::ifstream in(path_);
        if (!in) throw UsageError("cannot open config file: " + path_);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw UsageError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!j.is_object()) throw UsageError("config file must hold a JSON object");
        for (const auto& apply : appliers_) apply(j);
    }

private:
    std::string path_;
    std::vector<std::function<void(const json&)>> appliers_;
};

void write_config_echo(const fs::path& out_dir, const json& effective) {
    std::ofstream out(out_dir / "config.json", std::ios::binary);
    if (!out) throw DataError("cannot write config echo in " + out_dir.string());
    out << effective.dump(1) << "\n";
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

// required values may come from the flag or the config file, so presence is
// checked after the merge
void require_set(const std::string& value, const char* flag) {
    if (value.empty())
        throw UsageError(std::string("missing required option ") + flag +
                         " (set the flag or the matching config key)");
}

std::map<ModalityId, double> parse_modality_values(const std::string& csv, const char* what) {
    std::map<ModalityId, double> out;
    std::size_t start = 0;
    while (start < csv.size()) {
        std::size_t comma = csv.find(',', start);
        const std::string part =
            csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const std::size_t eq = part.find('=');
        if (eq == std::string::npos)
            throw UsageError(std::string(what) + ": expected name=value pairs, got '" + part + "'");
        const ModalityId m = parse_modality(part.substr(0, eq));
        try {
            out[m] = std::stod(part.substr(eq + 1));
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": bad number in '" + part + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        const std::string part =
            csv.substr(start, comma == std::string::npos ? csv.size() - start : comma - start);
        if (!part.empty()) {
            try {
                out.push_back(std::stoull(part));
            } catch (const std::exception&) {
                throw UsageError("bad seed '" + part + "'");
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw UsageError("seed list must not be empty");
    return out;
}

json modalities_json(const std::vector<ModalityId>& mods) {
    json arr = json::array();
    for (ModalityId m : mods) arr.push_back(std::string(to_string(m)));
    return arr;
}

// shared training/experiment knobs
struct TrainFlags {
    std::string manifest;
    std::string features;
    std::string strategy = "concatenation";
    std::string modalities = "video,audio,language";
    int epochs = 100;
    double lr = 1e-3;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    Index model_width = 16;
    Index hidden_width = 64;
    bool no_standardize = false;
};

void add_train_flags(CLI::App* cmd, ConfigMerge& merge, TrainFlags& f, bool with_strategy,
                     bool with_seed) {
    merge.bind(cmd->add_option("--manifest", f.manifest, "dataset manifest CSV"), f.manifest, "manifest");
    merge.bind(cmd->add_option("--features", f.features, "feature file directory"), f.features,
               "features");
    if (with_strategy)
        merge.bind(cmd->add_option("--strategy", f.strategy, "concatenation|unified|combinatorial"),
                   f.strategy, "strategy");
    merge.bind(cmd->add_option("--modalities", f.modalities, "comma list of video,audio,language"),
               f.modalities, "modalities");
    merge.bind(cmd->add_option("--epochs", f.epochs, "training epochs"), f.epochs, "epochs");
    merge.bind(cmd->add_option("--lr", f.lr, "SGD learning rate"), f.lr, "lr");
    merge.bind(cmd->add_option("--momentum", f.momentum, "SGD momentum"), f.momentum, "momentum");
    if (with_seed) merge.bind(cmd->add_option("--seed", f.seed, "root seed"), f.seed, "seed");
    merge.bind(cmd->add_option("--model-width", f.model_width, "common token width d"), f.model_width,
               "model_width");
    merge.bind(cmd->add_option("--hidden-width", f.hidden_width, "hidden layer width h"), f.hidden_width,
               "hidden_width");
    merge.bind(cmd->add_flag("--no-standardize", f.no_standardize,
                             "skip train-set feature standardization"),
               f.no_standardize, "no_standardize");
}

json train_flags_json(const TrainFlags& f) {
    json j;
    j["manifest"] = f.manifest;
    j["features"] = f.features;
    j["strategy"] = f.strategy;
    j["modalities"] = f.modalities;
    j["epochs"] = f.epochs;
    j["lr"] = f.lr;
    j["momentum"] = f.momentum;
    j["model_width"] = f.model_width;
    j["hidden_width"] = f.hidden_width;
    j["standardize"] = !f.no_standardize;
    return j;
}

DataSplit load_split_with_features(const TrainFlags& f, const std::vector<ModalityId>& mods) {
    std::vector<SegmentRecord> records = read_manifest(f.manifest);
    attach_features(records, f.features, mods);
    return split_records(std::move(records));
}

// ---- subcommands ----

struct SynthArgs {
    std::string out_dir;
    std::uint64_t seed = 0;
    int train_size = 400;
    int test_size = 100;
    double explicit_prior = 521.0 / 1328.0;
    bool interaction = false;
    std::string widths;
    std::string separation;
};

int run_synth(const SynthArgs& a) {
    require_set(a.out_dir, "--out-dir");
    SynthSpec spec;
    spec.train_size = a.train_size;
    spec.test_size = a.test_size;
    spec.explicit_prior = a.explicit_prior;
    spec.interaction = a.interaction;
    if (!a.widths.empty())
        for (auto& [m, v] : parse_modality_values(a.widths, "--widths"))
            spec.widths[m] = static_cast<Index>(v);
    if (!a.separation.empty())
        for (auto& [m, v] : parse_modality_values(a.separation, "--separation")) spec.separation[m] = v;

    SynthDataset data = synth_dataset(spec, a.seed);

    fs::create_directories(fs::path(a.out_dir) / "features");
    std::vector<SegmentRecord> all;
    all.insert(all.end(), data.train.begin(), data.train.end());
    all.insert(all.end(), data.test.begin(), data.test.end());
    write_manifest(fs::path(a.out_dir) / "manifest.csv", all);
    for (const SegmentRecord& r : all)
        for (const auto& [m, values] : r.features) {
            FeatureVector fv{m, values, FeatureSource::Builtin};
            write_feature_file(fs::path(a.out_dir) / "features" / feature_filename(r.segment_id, m),
                               r.segment_id, fv);
        }

    json echo;
    echo["command"] = "synth";
    echo["seed"] = a.seed;
    echo["out_dir"] = a.out_dir;
    echo["train_size"] = a.train_size;
    echo["test_size"] = a.test_size;
    echo["explicit_prior"] = a.explicit_prior;
    echo["interaction"] = a.interaction;
    json w, s;
    for (ModalityId m : kAllModalities) {
        w[std::string(to_string(m))] = spec.widths.at(m);
        s[std::string(to_string(m))] = spec.separation.at(m);
    }
    echo["widths"] = w;
    echo["separation"] = s;
    write_config_echo(a.out_dir, echo);
    log::info("synth: wrote " + std::to_string(all.size()) + " segments to " + a.out_dir);
    return 0;
}

struct SegmentArgs {
    std::string sources;
    std::string out_dir;
    double max_len = 60.0;
    double min_tail = 5.0;
};

int run_segment(const SegmentArgs& a) {
    require_set(a.sources, "--sources");
    require_set(a.out_dir, "--out-dir");
    const std::vector<SourceRecord> sources = read_sources(a.sources);
    const std::vector<SegmentRecord> segments = segment_sources(sources, a.max_len, a.min_tail);
    fs::create_directories(a.out_dir);
    write_manifest(fs::path(a.out_dir) / "manifest.csv", segments);
    json echo;
    echo["command"] = "segment";
    echo["sources"] = a.sources;
    echo["out_dir"] = a.out_dir;
    echo["max_len"] = a.max_len;
    echo["min_tail"] = a.min_tail;
    write_config_echo(a.out_dir, echo);
    log::info("segment: " + std::to_string(sources.size()) + " sources -> " +
              std::to_string(segments.size()) + " segments");
    return 0;
}

struct ExtractArgs {
    std::string manifest;
    std::string out_dir;
    Index text_dim = 256;
    int n_fft = 1024;
    int hop = 512;
    int n_mels = 64;
    double fmin = 0.0;
    double fmax = 8000.0;
};

int run_extract(const ExtractArgs& a) {
    require_set(a.manifest, "--manifest");
    require_set(a.out_dir, "--out-dir");
    const std::vector<SegmentRecord> manifest = read_manifest(a.manifest);
    ExtractConfig cfg;
    cfg.text_dim = a.text_dim;
    cfg.mel = MelConfig{a.n_fft, a.hop, a.n_mels, a.fmin, a.fmax};
    fs::create_directories(a.out_dir);
    const ExtractSummary summary = extract_features(manifest, fs::path(a.out_dir) / "features", cfg);

    json rep;
    rep["written"] = summary.written;
    json fails = json::array();
    for (const ExtractFailure& f : summary.failures) {
        json e;
        e["segment_id"] = f.segment_id;
        e["modality"] = f.modality;
        e["error"] = f.error;
        fails.push_back(e);
    }
    rep["failures"] = fails;
    write_file(fs::path(a.out_dir) / "extract_report.json", rep.dump(1) + "\n");

    json echo;
    echo["command"] = "extract";
    echo["manifest"] = a.manifest;
    echo["out_dir"] = a.out_dir;
    echo["text_dim"] = a.text_dim;
    echo["n_fft"] = a.n_fft;
    echo["hop"] = a.hop;
    echo["n_mels"] = a.n_mels;
    echo["fmin"] = a.fmin;
    echo["fmax"] = a.fmax;
    write_config_echo(a.out_dir, echo);

    if (!summary.failures.empty()) {
        log::error("extract: " + std::to_string(summary.failures.size()) + " failures");
        return 2;
    }
    log::info("extract: wrote " + std::to_string(summary.written) + " feature files");
    return 0;
}

struct TrainArgs {
    TrainFlags flags;
    std::string out_dir;
};

int run_train(const TrainArgs& a) {
    require_set(a.flags.manifest, "--manifest");
    require_set(a.flags.features, "--features");
    require_set(a.out_dir, "--out-dir");
    const FusionStrategy strategy = parse_strategy(a.flags.strategy);
    const std::vector<ModalityId> mods = parse_modalities(a.flags.modalities);
    DataSplit split = load_split_with_features(a.flags, mods);
    if (split.train.empty()) throw DataError("train: manifest has no train-split segments");

    TrainConfig tc;
    tc.strategy = strategy;
    tc.modalities = mods;
    tc.epochs = a.flags.epochs;
    tc.lr = a.flags.lr;
    tc.momentum = a.flags.momentum;
    tc.seed = a.flags.seed;
    tc.dims.model_width = a.flags.model_width;
    tc.dims.hidden_width = a.flags.hidden_width;
    tc.standardize = !a.flags.no_standardize;
    TrainResult result = train(tc, split.train);

    fs::create_directories(a.out_dir);
    save_checkpoint(result.model, fs::path(a.out_dir) / "checkpoint.json");

    json rep;
    rep["seed"] = a.flags.seed;
    rep["strategy"] = a.flags.strategy;
    rep["modalities"] = modalities_json(mods);
    rep["epochs"] = a.flags.epochs;
    rep["lr"] = a.flags.lr;
    rep["momentum"] = a.flags.momentum;
    rep["train_segments"] = split.train.size();
    rep["epoch_loss"] = result.epoch_loss;
    rep["final_loss"] = result.epoch_loss.back();
    write_file(fs::path(a.out_dir) / "train_report.json", rep.dump(1) + "\n");

    json echo = train_flags_json(a.flags);
    echo["command"] = "train";
    echo["seed"] = a.flags.seed;
    echo["out_dir"] = a.out_dir;
    write_config_echo(a.out_dir, echo);
    log::info("train: final epoch loss " + std::to_string(result.epoch_loss.back()));
    return 0;
}

struct EvalArgs {
    std::string manifest;
    std::string features;
    std::string checkpoint;
    std::string out_dir;
    std::string split = "test";
};

int run_eval(const EvalArgs& a) {
    require_set(a.manifest, "--manifest");
    require_set(a.features, "--features");
    require_set(a.checkpoint, "--checkpoint");
    require_set(a.out_dir, "--out-dir");
    if (a.split != "train" && a.split != "test") throw UsageError("eval: --split must be train or test");
    const FusionModel model = load_checkpoint(a.checkpoint);
    std::vector<SegmentRecord> records = read_manifest(a.manifest);
    attach_features(records, a.features, model.modalities);
    DataSplit split = split_records(std::move(records));
    const std::vector<SegmentRecord>* chosen = nullptr;
    if (a.split == "test")
        chosen = &split.test;
    else if (a.split == "train")
        chosen = &split.train;
    else
        throw UsageError("eval: --split must be train or test");
    if (chosen->empty()) throw DataError("eval: no segments in the " + a.split + " split");

    const EvalReport report = evaluate(model, *chosen);
    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / "eval_report.json", to_json(report));
    write_file(fs::path(a.out_dir) / "eval_report.txt", to_text(report));

    json echo;
    echo["command"] = "eval";
    echo["manifest"] = a.manifest;
    echo["features"] = a.features;
    echo["checkpoint"] = a.checkpoint;
    echo["out_dir"] = a.out_dir;
    echo["split"] = a.split;
    write_config_echo(a.out_dir, echo);
    std::printf("%s", to_text(report).c_str());
    return 0;
}

struct ExperimentArgs {
    TrainFlags flags;
    std::string out_dir;
    std::string seeds = "1,2,3,4,5";
};

ExperimentConfig experiment_config(const ExperimentArgs& a) {
    ExperimentConfig cfg;
    cfg.epochs = a.flags.epochs;
    cfg.lr = a.flags.lr;
    cfg.momentum = a.flags.momentum;
    cfg.seeds = parse_seed_list(a.seeds);
    cfg.dims.model_width = a.flags.model_width;
    cfg.dims.hidden_width = a.flags.hidden_width;
    cfg.standardize = !a.flags.no_standardize;
    return cfg;
}

json experiment_echo(const ExperimentArgs& a, const char* command) {
    json echo = train_flags_json(a.flags);
    echo["command"] = command;
    echo["out_dir"] = a.out_dir;
    echo["seeds"] = a.seeds;
    echo.erase("strategy");  // experiments sweep strategies/subsets themselves
    return echo;
}

int run_compare(const ExperimentArgs& a) {
    require_set(a.flags.manifest, "--manifest");
    require_set(a.flags.features, "--features");
    require_set(a.out_dir, "--out-dir");
    const std::vector<ModalityId> all(kAllModalities.begin(), kAllModalities.end());
    DataSplit split = load_split_with_features(a.flags, all);
    if (split.train.empty() || split.test.empty())
        throw DataError("compare: need nonempty train and test splits");
    const ComparisonReport report = run_fusion_comparison(split, experiment_config(a));
    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / "comparison.json", to_json(report));
    write_file(fs::path(a.out_dir) / "comparison.txt", to_text(report));
    write_config_echo(a.out_dir, experiment_echo(a, "compare"));
    std::printf("%s", to_text(report).c_str());
    return 0;
}

int run_ablate(const ExperimentArgs& a) {
    require_set(a.flags.manifest, "--manifest");
    require_set(a.flags.features, "--features");
    require_set(a.out_dir, "--out-dir");
    const std::vector<ModalityId> all(kAllModalities.begin(), kAllModalities.end());
    DataSplit split = load_split_with_features(a.flags, all);
    if (split.train.empty() || split.test.empty())
        throw DataError("ablate: need nonempty train and test splits");
    const AblationReport report = run_modality_ablation(split, experiment_config(a));
    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / "ablation.json", to_json(report));
    write_file(fs::path(a.out_dir) / "ablation.txt", to_text(report));
    write_config_echo(a.out_dir, experiment_echo(a, "ablate"));
    std::printf("%s", to_text(report).c_str());
    return 0;
}

struct RunArgs {
    std::string manifest;
    std::string features;
    std::string checkpoint;
    std::string out_dir;
    std::string captioner;  // empty -> builtin mock
    double timeout = 30.0;
    double chunk_len = 10.0;
    std::string split = "all";
    std::uint64_t seed = 0;
};

int run_run(const RunArgs& a) {
    require_set(a.manifest, "--manifest");
    require_set(a.features, "--features");
    require_set(a.checkpoint, "--checkpoint");
    require_set(a.out_dir, "--out-dir");
    if (a.split != "train" && a.split != "test" && a.split != "all")
        throw UsageError("run: --split must be train, test or all");
    if (!(a.timeout > 0)) throw UsageError("run: --timeout must be positive");
    const FusionModel model = load_checkpoint(a.checkpoint);
    std::vector<SegmentRecord> records = read_manifest(a.manifest);
    if (a.split != "all") {
        DataSplit split = split_records(std::move(records));
        records = a.split == "train" ? std::move(split.train) : std::move(split.test);
    }
    if (records.empty()) throw DataError("run: no segments selected");

    MockCaptioner mock;
    std::optional<SubprocessCaptioner> external;
    Captioner* captioner = &mock;
    if (!a.captioner.empty()) {
        external.emplace(a.captioner, a.timeout);
        captioner = &*external;
    }

    PipelineConfig cfg;
    cfg.chunk_len_s = a.chunk_len;
    cfg.feature_dir = a.features;
    RunReport report = pipeline_run(records, model, *captioner, cfg);
    report.seed = a.seed;

    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / "run_report.json", to_json(report));
    write_file(fs::path(a.out_dir) / "run_report.txt", to_text(report));

    json echo;
    echo["command"] = "run";
    echo["manifest"] = a.manifest;
    echo["features"] = a.features;
    echo["checkpoint"] = a.checkpoint;
    echo["out_dir"] = a.out_dir;
    echo["captioner"] = a.captioner.empty() ? "builtin-mock" : a.captioner;
    echo["timeout"] = a.timeout;
    echo["chunk_len"] = a.chunk_len;
    echo["split"] = a.split;
    echo["seed"] = a.seed;
    write_config_echo(a.out_dir, echo);
    std::printf("%s", to_text(report).c_str());
    if (report.adapter_failures > 0) return 3;
    return report.failed_segments > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trifuse: explicit-segment classification and summarization pipeline"};
    app.require_subcommand(1);

    int rc = 0;

    // synth
    auto* synth = app.add_subcommand("synth", "emit a synthetic Gaussian-cluster dataset");
    SynthArgs sa;
    ConfigMerge synth_merge(synth);
    synth_merge.bind(synth->add_option("--out-dir", sa.out_dir), sa.out_dir, "out_dir");
    synth_merge.bind(synth->add_option("--seed", sa.seed), sa.seed, "seed");
    synth_merge.bind(synth->add_option("--train-size", sa.train_size), sa.train_size, "train_size");
    synth_merge.bind(synth->add_option("--test-size", sa.test_size), sa.test_size, "test_size");
    synth_merge.bind(synth->add_option("--explicit-prior", sa.explicit_prior), sa.explicit_prior,
                     "explicit_prior");
    synth_merge.bind(synth->add_flag("--interaction", sa.interaction,
                                     "label = sign agreement of video and audio clusters"),
                     sa.interaction, "interaction");
    synth_merge.bind(synth->add_option("--widths", sa.widths, "e.g. video=16,audio=12,language=10"),
                     sa.widths, "widths");
    synth_merge.bind(synth->add_option("--separation", sa.separation, "per-modality cluster separation"),
                     sa.separation, "separation");
    synth->callback([&] {
        synth_merge.apply();
        rc = run_synth(sa);
    });

    // segment
    auto* segment = app.add_subcommand("segment", "expand sources into <=60 s segment rows");
    SegmentArgs ga;
    ConfigMerge segment_merge(segment);
    segment_merge.bind(segment->add_option("--sources", ga.sources, "sources CSV"), ga.sources,
                       "sources");
    segment_merge.bind(segment->add_option("--out-dir", ga.out_dir), ga.out_dir, "out_dir");
    segment_merge.bind(segment->add_option("--max-len", ga.max_len), ga.max_len, "max_len");
    segment_merge.bind(segment->add_option("--min-tail", ga.min_tail), ga.min_tail, "min_tail");
    segment->callback([&] {
        segment_merge.apply();
        rc = run_segment(ga);
    });

    // extract
    auto* extract = app.add_subcommand("extract", "compute builtin features from segment payloads");
    ExtractArgs xa;
    ConfigMerge extract_merge(extract);
    extract_merge.bind(extract->add_option("--manifest", xa.manifest), xa.manifest, "manifest");
    extract_merge.bind(extract->add_option("--out-dir", xa.out_dir), xa.out_dir, "out_dir");
    extract_merge.bind(extract->add_option("--text-dim", xa.text_dim), xa.text_dim, "text_dim");
    extract_merge.bind(extract->add_option("--n-fft", xa.n_fft), xa.n_fft, "n_fft");
    extract_merge.bind(extract->add_option("--hop", xa.hop), xa.hop, "hop");
    extract_merge.bind(extract->add_option("--n-mels", xa.n_mels), xa.n_mels, "n_mels");
    extract_merge.bind(extract->add_option("--fmin", xa.fmin), xa.fmin, "fmin");
    extract_merge.bind(extract->add_option("--fmax", xa.fmax), xa.fmax, "fmax");
    extract->callback([&] {
        extract_merge.apply();
        rc = run_extract(xa);
    });

    // train
    auto* train_cmd = app.add_subcommand("train", "train one fusion model");
    TrainArgs ta;
    ConfigMerge train_merge(train_cmd);
    add_train_flags(train_cmd, train_merge, ta.flags, /*with_strategy=*/true, /*with_seed=*/true);
    train_merge.bind(train_cmd->add_option("--out-dir", ta.out_dir), ta.out_dir, "out_dir");
    train_cmd->callback([&] {
        train_merge.apply();
        rc = run_train(ta);
    });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint with F1 metrics");
    EvalArgs ea;
    ConfigMerge eval_merge(eval_cmd);
    eval_merge.bind(eval_cmd->add_option("--manifest", ea.manifest), ea.manifest, "manifest");
    eval_merge.bind(eval_cmd->add_option("--features", ea.features), ea.features, "features");
    eval_merge.bind(eval_cmd->add_option("--checkpoint", ea.checkpoint), ea.checkpoint,
                    "checkpoint");
    eval_merge.bind(eval_cmd->add_option("--out-dir", ea.out_dir), ea.out_dir, "out_dir");
    eval_merge.bind(eval_cmd->add_option("--split", ea.split, "train|test"), ea.split, "split");
    eval_cmd->callback([&] {
        eval_merge.apply();
        rc = run_eval(ea);
    });

    // compare
    auto* compare = app.add_subcommand("compare", "train and compare the three fusion strategies");
    ExperimentArgs ca;
    ConfigMerge compare_merge(compare);
    add_train_flags(compare, compare_merge, ca.flags, /*with_strategy=*/false, /*with_seed=*/false);
    compare_merge.bind(compare->add_option("--out-dir", ca.out_dir), ca.out_dir, "out_dir");
    compare_merge.bind(compare->add_option("--seeds", ca.seeds, "comma list of seeds"), ca.seeds, "seeds");
    compare->callback([&] {
        compare_merge.apply();
        rc = run_compare(ca);
    });

    // ablate
    auto* ablate = app.add_subcommand("ablate", "concatenation models on all 7 modality subsets");
    ExperimentArgs aa;
    ConfigMerge ablate_merge(ablate);
    add_train_flags(ablate, ablate_merge, aa.flags, /*with_strategy=*/false, /*with_seed=*/false);
    ablate_merge.bind(ablate->add_option("--out-dir", aa.out_dir), aa.out_dir, "out_dir");
    ablate_merge.bind(ablate->add_option("--seeds", aa.seeds, "comma list of seeds"), aa.seeds, "seeds");
    ablate->callback([&] {
        ablate_merge.apply();
        rc = run_ablate(aa);
    });

    // run
    auto* run_cmd = app.add_subcommand("run", "classify segments and summarize the explicit ones");
    RunArgs ra;
    ConfigMerge run_merge(run_cmd);
    run_merge.bind(run_cmd->add_option("--manifest", ra.manifest), ra.manifest, "manifest");
    run_merge.bind(run_cmd->add_option("--features", ra.features), ra.features, "features");
    run_merge.bind(run_cmd->add_option("--checkpoint", ra.checkpoint), ra.checkpoint,
                   "checkpoint");
    run_merge.bind(run_cmd->add_option("--out-dir", ra.out_dir), ra.out_dir, "out_dir");
    run_merge.bind(run_cmd->add_option("--captioner", ra.captioner,
                                       "external captioner command; omit for the builtin mock"),
                   ra.captioner, "captioner");
    run_merge.bind(run_cmd->add_option("--timeout", ra.timeout, "captioner timeout seconds"), ra.timeout,
                   "timeout");
    run_merge.bind(run_cmd->add_option("--chunk-len", ra.chunk_len, "summary chunk length seconds"),
                   ra.chunk_len, "chunk_len");
    run_merge.bind(run_cmd->add_option("--split", ra.split, "train|test|all"), ra.split, "split");
    run_merge.bind(run_cmd->add_option("--seed", ra.seed), ra.seed, "seed");
    run_cmd->callback([&] {
        run_merge.apply();
        rc = run_run(ra);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        log::error(e.what());
        return 1;
    } catch (const DataError& e) {
        log::error(e.what());
        return 2;
    } catch (const AdapterError& e) {
        log::error(e.what());
        return 3;
    } catch (const std::exception& e) {
        log::error(std::string("unexpected: ") + e.what());
        return 1;
    }
    return rc;
}
