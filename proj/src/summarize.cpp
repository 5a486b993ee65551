#include "trifuse/summarize.hpp"

namespace trifuse {

ChunkPlan plan_chunks(const SegmentRecord& segment, double chunk_len_s) {
    if (!(chunk_len_s > 0)) throw UsageError("plan_chunks: chunk length must be positive");
    const double duration = segment.duration_s();
    if (!(duration > 0))
        throw DataError("plan_chunks: segment " + segment.segment_id + " has nonpositive duration");
    ChunkPlan plan;
    plan.segment_id = segment.segment_id;
    plan.chunk_len_s = chunk_len_s;
    // no tail merging here: every chunk must stay within chunk_len_s, so a
    // short final chunk keeps its own interval
    plan.chunks = segment_video(duration, chunk_len_s, 0.0);
    if (segment.video_ref != "-" && !segment.video_ref.empty()) plan.frames_ref = segment.video_ref;
    return plan;
}

SegmentSummary summarize_segment(const ChunkPlan& plan, Captioner& captioner) {
    SegmentSummary out;
    out.segment_id = plan.segment_id;
    for (std::size_t i = 0; i < plan.chunks.size(); ++i) {
        CaptionRequest req;
        req.segment_id = plan.segment_id;
        req.chunk_index = static_cast<int>(i);
        req.start_s = plan.chunks[i].first;
        req.end_s = plan.chunks[i].second;
        req.frames_ref = plan.frames_ref;
        try {
            out.captions.push_back(captioner.caption(req));
        } catch (const Error& e) {
            throw ChunkCaptionError("segment " + plan.segment_id + ": caption failed on chunk " +
                                        std::to_string(i) + ": " + e.what(),
                                    static_cast<int>(i), std::move(out.captions));
        }
    }
    for (std::size_t i = 0; i < out.captions.size(); ++i) {
        if (i) out.joined += ' ';
        out.joined += out.captions[i];
    }
    return out;
}

}  // namespace trifuse
