#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trifuse/captioner.hpp"
#include "trifuse/dataset.hpp"

namespace trifuse {

// Ordered chunk intervals of one segment, as offsets from the segment
// start. Chunks partition [0, duration); every chunk is at most
// chunk_len_s long, so a short final remainder keeps its own chunk.
struct ChunkPlan {
    std::string segment_id;
    std::vector<std::pair<double, double>> chunks;
    double chunk_len_s = 10.0;
    std::optional<std::string> frames_ref;  // handed to the captioner
};

ChunkPlan plan_chunks(const SegmentRecord& segment, double chunk_len_s = 10.0);

struct SegmentSummary {
    std::string segment_id;
    std::vector<std::string> captions;  // one per chunk, in chunk order
    std::string joined;                 // captions joined with single spaces
};

// A captioner failure on chunk i aborts the segment and carries the
// captions for chunks 0..i-1.
class ChunkCaptionError : public AdapterError {
public:
    ChunkCaptionError(const std::string& msg, int failed_chunk, std::vector<std::string> partial)
        : AdapterError(msg), failed_chunk_(failed_chunk), partial_(std::move(partial)) {}

    int failed_chunk() const { return failed_chunk_; }
    const std::vector<std::string>& partial_captions() const { return partial_; }

private:
    int failed_chunk_;
    std::vector<std::string> partial_;
};

// Captions are requested strictly in chunk order.
SegmentSummary summarize_segment(const ChunkPlan& plan, Captioner& captioner);

}  // namespace trifuse
