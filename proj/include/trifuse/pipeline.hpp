#pragma once

#include <filesystem>

#include "trifuse/summarize.hpp"
#include "trifuse/train.hpp"

namespace trifuse {

struct PipelineConfig {
    double chunk_len_s = 10.0;
    // where to find <segment_id>.<modality>.json when a record carries no
    // inline features; empty means inline only
    std::filesystem::path feature_dir;
};

struct SegmentOutcome {
    std::string segment_id;
    double start_s = 0.0;
    double end_s = 0.0;
    std::array<double, 2> probs{0.0, 0.0};  // [non_explicit, explicit]
    BinaryLabel predicted = BinaryLabel::NonExplicit;
    std::optional<SegmentSummary> summary;  // present iff predicted Explicit and captioning succeeded
    std::string error;                      // nonempty when this segment failed
    std::string error_kind;                 // "data" | "adapter" when failed
    bool ok = true;
};

struct RunReport {
    std::vector<SegmentOutcome> segments;
    long explicit_count = 0;         // segments predicted Explicit
    long captioner_invocations = 0;  // segments handed to the summarizer
    long caption_requests = 0;       // per-chunk adapter calls
    long failed_segments = 0;
    long adapter_failures = 0;
    std::uint64_t seed = 0;  // root seed echo, set by the caller
};

// Classifies every segment and summarizes exactly those predicted Explicit.
// Per-segment failures are isolated: they are reported in the outcome list
// and do not abort the run.
RunReport pipeline_run(const std::vector<SegmentRecord>& manifest, const FusionModel& model,
                       Captioner& captioner, const PipelineConfig& cfg = {});

std::string to_json(const RunReport& r);
std::string to_text(const RunReport& r);

}  // namespace trifuse
