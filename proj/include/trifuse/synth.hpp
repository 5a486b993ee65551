#pragma once

#include <cstdint>
#include <map>

#include "trifuse/dataset.hpp"

namespace trifuse {

// Two Gaussian clusters per modality (unit noise, centers sep/2 apart along
// a seeded random unit direction), sized after the train/test proportions
// of the reference corpus. The optional interaction mode makes the label
// depend on the sign agreement of the video and audio clusters, which no
// single modality can predict alone.
struct SynthSpec {
    int train_size = 400;
    int test_size = 100;
    // explicit-class prior; the default mirrors the reference 521/1328 split
    double explicit_prior = 521.0 / 1328.0;
    std::map<ModalityId, Index> widths{
        {ModalityId::Video, 16}, {ModalityId::Audio, 12}, {ModalityId::Language, 10}};
    // center distance per modality, in units of the noise sigma
    std::map<ModalityId, double> separation{
        {ModalityId::Video, 1.5}, {ModalityId::Audio, 1.2}, {ModalityId::Language, 1.0}};
    bool interaction = false;
};

struct SynthDataset {
    std::vector<SegmentRecord> train;
    std::vector<SegmentRecord> test;
};

SynthDataset synth_dataset(const SynthSpec& spec, std::uint64_t seed);

}  // namespace trifuse
