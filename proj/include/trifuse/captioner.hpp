#pragma once

#include <optional>
#include <string>

#include "trifuse/errors.hpp"

namespace trifuse {

// One chunk of one segment. Times are offsets within the segment.
struct CaptionRequest {
    std::string segment_id;
    int chunk_index = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    std::optional<std::string> frames_ref;
};

// Turns a chunk reference into one line of natural language.
class Captioner {
public:
    virtual ~Captioner() = default;

    std::string caption(const CaptionRequest& req) {
        ++calls_;
        return do_caption(req);
    }

    // number of per-chunk caption requests made so far
    long call_count() const { return calls_; }

private:
    virtual std::string do_caption(const CaptionRequest& req) = 0;
    long calls_ = 0;
};

// Deterministic built-in: caption = "chunk <index> of <segment_id>."
class MockCaptioner : public Captioner {
private:
    std::string do_caption(const CaptionRequest& req) override {
        return "chunk " + std::to_string(req.chunk_index) + " of " + req.segment_id + ".";
    }
};

// Runs a configured command per chunk, writes one JSON object to its stdin:
//   {"segment_id": str, "chunk_index": int, "start_s": num, "end_s": num,
//    "frames_ref": str|null}
// and reads one UTF-8 caption line from its stdout. Nonzero exit, timeout,
// or an empty caption raise AdapterError.
class SubprocessCaptioner : public Captioner {
public:
    explicit SubprocessCaptioner(std::string command, double timeout_s = 30.0);

private:
    std::string do_caption(const CaptionRequest& req) override;

    std::string command_;
    double timeout_s_;
};

}  // namespace trifuse
