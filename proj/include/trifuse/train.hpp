#pragma once

#include <cstdint>

#include "trifuse/dataset.hpp"
#include "trifuse/fusion.hpp"
#include "trifuse/metrics.hpp"

namespace trifuse {

struct TrainConfig {
    FusionStrategy strategy = FusionStrategy::Concatenation;
    std::vector<ModalityId> modalities{ModalityId::Video, ModalityId::Audio, ModalityId::Language};
    int epochs = 100;
    double lr = 1e-3;
    double momentum = 0.9;
    int batch_size = 1;  // the training loop is defined for single-sample steps only
    std::uint64_t seed = 0;
    FusionDims dims;  // modality widths may be left empty and are then inferred
    // fit per-modality standardization on the training set before training
    bool standardize = true;
};

struct TrainResult {
    FusionModel model;
    std::vector<double> epoch_loss;  // mean sample loss per epoch
};

// epochs x |train| single-sample SGD steps in a seeded shuffle order.
// Identical (config, data) give bit-identical final parameters. lr may be
// zero, in which case parameters are left untouched and only the loss trace
// is produced.
TrainResult train(const TrainConfig& cfg, const std::vector<SegmentRecord>& train_set);

// argmax prediction over the two class probabilities; an exact tie resolves
// to NonExplicit
BinaryLabel decide(const Prediction& p);

EvalReport evaluate(const FusionModel& model, const std::vector<SegmentRecord>& test_set);

}  // namespace trifuse
