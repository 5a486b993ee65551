#include "trifuse/train.hpp"

#include <cmath>
#include <numeric>

#include "trifuse/rng.hpp"

namespace trifuse {

namespace {

void validate(const TrainConfig& cfg, const std::vector<SegmentRecord>& data) {
    if (cfg.epochs <= 0) throw UsageError("train: epochs must be positive");
    if (cfg.lr < 0) throw UsageError("train: learning rate must be nonnegative");
    if (cfg.momentum < 0 || cfg.momentum >= 1) throw UsageError("train: momentum must be in [0, 1)");
    if (cfg.batch_size != 1) throw UsageError("train: batch size is fixed at 1");
    if (data.empty()) throw UsageError("train: empty training set");
}

// training-set mean and 1/(std + 1e-8) per feature dimension
void fit_scalers(FusionModel& model, const std::vector<SegmentRecord>& data) {
    for (ModalityId m : model.modalities) {
        const Index dm = model.modality_widths.at(m);
        Vector mean = Vector::Zero(dm);
        for (const SegmentRecord& r : data) mean += r.features.at(m);
        mean /= static_cast<Scalar>(data.size());
        Vector var = Vector::Zero(dm);
        for (const SegmentRecord& r : data) {
            Vector d = r.features.at(m) - mean;
            var += d.cwiseProduct(d);
        }
        var /= static_cast<Scalar>(data.size());
        FeatureScaler& sc = model.scalers.at(m);
        sc.shift = mean;
        sc.scale = (var.array().sqrt() + 1e-8).inverse().matrix();
    }
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<SegmentRecord>& train_set) {
    validate(cfg, train_set);

    FusionDims dims = cfg.dims;
    const std::map<ModalityId, Index> inferred = infer_widths(train_set, cfg.modalities);
    for (ModalityId m : cfg.modalities) {
        auto configured = dims.modality_widths.find(m);
        if (configured == dims.modality_widths.end()) {
            dims.modality_widths[m] = inferred.at(m);
        } else if (configured->second != inferred.at(m)) {
            throw DataError("train: configured " + std::string(to_string(m)) + " width " +
                            std::to_string(configured->second) + " does not match data width " +
                            std::to_string(inferred.at(m)));
        }
    }

    Rng root(cfg.seed);
    TrainResult result;
    result.model = init_model(cfg.strategy, cfg.modalities, dims, root.child("init").seed());
    FusionModel& model = result.model;
    if (cfg.standardize) fit_scalers(model, train_set);
    model.set_requires_grad(true);

    SgdOptimizer opt(cfg.lr > 0 ? cfg.lr : 1.0, cfg.momentum);
    std::vector<Tensor*> params = model.parameters();

    Rng shuffler = root.child("shuffle");
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    result.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffler.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const SegmentRecord& rec = train_set[idx];
            Tape tape;
            BoundModel bound = bind(tape, model);
            Var loss = cross_entropy_logits(forward_logits(tape, bound, rec.features),
                                            label_index(rec.binary_label));
            loss_sum += loss.value().item();
            if (cfg.lr > 0) {
                tape.backward(loss);
                opt.step(params);
            }
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(train_set.size()));
    }
    model.set_requires_grad(false);
    for (Tensor* p : params) p->grad.reset();
    return result;
}

BinaryLabel decide(const Prediction& p) {
    return p.probs[1] > p.probs[0] ? BinaryLabel::Explicit : BinaryLabel::NonExplicit;
}

EvalReport evaluate(const FusionModel& model, const std::vector<SegmentRecord>& test_set) {
    if (test_set.empty()) throw UsageError("evaluate: empty test set");
    std::vector<int> y_true, y_pred;
    y_true.reserve(test_set.size());
    y_pred.reserve(test_set.size());
    for (const SegmentRecord& r : test_set) {
        y_true.push_back(label_index(r.binary_label));
        y_pred.push_back(label_index(decide(predict(model, r.features))));
    }
    return compute_metrics(y_true, y_pred);
}

}  // namespace trifuse
