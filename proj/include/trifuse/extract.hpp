#pragma once

#include <filesystem>

#include "trifuse/dataset.hpp"
#include "trifuse/features.hpp"

namespace trifuse {

struct ExtractConfig {
    MelConfig mel;
    Index text_dim = 256;
};

struct ExtractFailure {
    std::string segment_id;
    std::string modality;
    std::string error;
};

struct ExtractSummary {
    long written = 0;
    std::vector<ExtractFailure> failures;
};

// Computes builtin features from each segment's payload refs and writes one
// feature JSON per (segment, modality) into out_dir. Payloads may cover the
// whole source: audio is sliced by the segment's time window, frame stacks
// by proportional time mapping (the source duration is taken as the largest
// end_s among its segments), and transcripts are reused whole. A "-" ref
// skips that modality; per-segment failures are collected, not thrown.
// Re-running over the same inputs rewrites identical bytes.
ExtractSummary extract_features(const std::vector<SegmentRecord>& manifest,
                                const std::filesystem::path& out_dir, const ExtractConfig& cfg = {});

}  // namespace trifuse
