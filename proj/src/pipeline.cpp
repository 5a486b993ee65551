#include "trifuse/pipeline.hpp"

#include <cstdio>

#include <json.hpp>

#include "trifuse/io.hpp"

namespace trifuse {

namespace {

FeatureMap features_for(const SegmentRecord& rec, const FusionModel& model, const PipelineConfig& cfg) {
    FeatureMap out;
    for (ModalityId m : model.modalities) {
        auto it = rec.features.find(m);
        if (it != rec.features.end()) {
            out[m] = it->second;
            continue;
        }
        if (cfg.feature_dir.empty())
            throw DataError("segment " + rec.segment_id + ": no inline " + std::string(to_string(m)) +
                            " features and no feature directory configured");
        out[m] = load_feature_file(cfg.feature_dir / feature_filename(rec.segment_id, m), m,
                                   model.modality_widths.at(m))
                     .values;
    }
    return out;
}

}  // namespace

RunReport pipeline_run(const std::vector<SegmentRecord>& manifest, const FusionModel& model,
                       Captioner& captioner, const PipelineConfig& cfg) {
    if (manifest.empty()) throw UsageError("pipeline_run: empty manifest");
    RunReport report;
    const long calls_before = captioner.call_count();
    for (const SegmentRecord& rec : manifest) {
        SegmentOutcome out;
        out.segment_id = rec.segment_id;
        out.start_s = rec.start_s;
        out.end_s = rec.end_s;
        try {
            const FeatureMap features = features_for(rec, model, cfg);
            const Prediction pred = predict(model, features);
            out.probs = {pred.probs[0], pred.probs[1]};
            out.predicted = decide(pred);
            if (out.predicted == BinaryLabel::Explicit) {
                ++report.explicit_count;
                ++report.captioner_invocations;
                out.summary = summarize_segment(plan_chunks(rec, cfg.chunk_len_s), captioner);
            }
        } catch (const AdapterError& e) {
            out.ok = false;
            out.error = e.what();
            out.error_kind = "adapter";
            ++report.failed_segments;
            ++report.adapter_failures;
        } catch (const Error& e) {
            out.ok = false;
            out.error = e.what();
            out.error_kind = "data";
            ++report.failed_segments;
        }
        report.segments.push_back(std::move(out));
    }
    report.caption_requests = captioner.call_count() - calls_before;
    return report;
}

std::string to_json(const RunReport& r) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["explicit_count"] = r.explicit_count;
    j["captioner_invocations"] = r.captioner_invocations;
    j["caption_requests"] = r.caption_requests;
    j["failed_segments"] = r.failed_segments;
    nlohmann::json segs = nlohmann::json::array();
    for (const SegmentOutcome& s : r.segments) {
        nlohmann::json e;
        e["segment_id"] = s.segment_id;
        e["start_s"] = s.start_s;
        e["end_s"] = s.end_s;
        e["ok"] = s.ok;
        if (s.ok) {
            e["prob_non_explicit"] = s.probs[0];
            e["prob_explicit"] = s.probs[1];
            e["predicted"] = std::string(to_string(s.predicted));
            if (s.summary) {
                e["captions"] = s.summary->captions;
                e["summary"] = s.summary->joined;
            }
        } else {
            e["error"] = s.error;
            e["error_kind"] = s.error_kind;
        }
        segs.push_back(e);
    }
    j["segments"] = segs;
    return j.dump(1);
}

std::string to_text(const RunReport& r) {
    std::string out;
    char buf[256];
    for (const SegmentOutcome& s : r.segments) {
        if (!s.ok) {
            std::snprintf(buf, sizeof(buf), "%-20s [%8.2f, %8.2f)  FAILED: ", s.segment_id.c_str(),
                          s.start_s, s.end_s);
            out += buf;
            out += s.error + "\n";
            continue;
        }
        std::snprintf(buf, sizeof(buf), "%-20s [%8.2f, %8.2f)  p(explicit)=%.4f  %s\n",
                      s.segment_id.c_str(), s.start_s, s.end_s, s.probs[1],
                      std::string(to_string(s.predicted)).c_str());
        out += buf;
        if (s.summary) out += "    summary: " + s.summary->joined + "\n";
    }
    std::snprintf(buf, sizeof(buf),
                  "\nsegments: %zu | explicit: %ld | summarized: %ld | caption requests: %ld | failed: %ld\n",
                  r.segments.size(), r.explicit_count, r.captioner_invocations, r.caption_requests,
                  r.failed_segments);
    out += buf;
    return out;
}

}  // namespace trifuse
