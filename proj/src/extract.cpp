#include "trifuse/extract.hpp"

#include <cmath>
#include <map>

#include "trifuse/io.hpp"
#include "trifuse/log.hpp"

namespace trifuse {

namespace {

struct SourceCache {
    std::map<std::string, AudioBuffer> audio;
    std::map<std::string, FrameStack> frames;
    std::map<std::string, std::string> text;
};

FeatureVector segment_audio_features(const SegmentRecord& rec, const AudioBuffer& full,
                                     const MelConfig& mel_cfg) {
    const auto len = static_cast<long>(full.samples.size());
    long start = std::lround(rec.start_s * full.sample_rate);
    long end = std::lround(rec.end_s * full.sample_rate);
    start = std::max(0l, std::min(start, len));
    end = std::max(start, std::min(end, len));
    if (end - start < mel_cfg.n_fft)
        throw DataError("audio window [" + std::to_string(rec.start_s) + ", " + std::to_string(rec.end_s) +
                        ") holds " + std::to_string(end - start) + " samples, need at least " +
                        std::to_string(mel_cfg.n_fft));
    AudioBuffer slice;
    slice.sample_rate = full.sample_rate;
    slice.samples.assign(full.samples.begin() + start, full.samples.begin() + end);
    return audio_features(mel_spectrogram(slice, mel_cfg));
}

FeatureVector segment_video_features(const SegmentRecord& rec, const FrameStack& full,
                                     double source_duration) {
    const Index total = full.frames();
    // frames are assumed uniformly spaced over the source duration
    auto frame_at = [&](double t) {
        return static_cast<Index>(std::floor(t / source_duration * static_cast<double>(total)));
    };
    Index f0 = std::clamp<Index>(frame_at(rec.start_s), 0, total);
    Index f1 = std::clamp<Index>(frame_at(rec.end_s), 0, total);
    if (f1 - f0 < 2) {  // difference features need two frames
        f1 = std::min<Index>(total, f0 + 2);
        f0 = std::max<Index>(0, f1 - 2);
    }
    if (f1 - f0 < 2)
        throw DataError("frame stack holds " + std::to_string(total) + " frames, need at least 2");
    const Index frame_sz = full.channels() * full.height() * full.width();
    Tensor slice = Tensor::zeros({f1 - f0, full.channels(), full.height(), full.width()});
    slice.flat() = full.data.flat().segment(f0 * frame_sz, (f1 - f0) * frame_sz);
    return video_features(FrameStack{std::move(slice)});
}

}  // namespace

ExtractSummary extract_features(const std::vector<SegmentRecord>& manifest,
                                const std::filesystem::path& out_dir, const ExtractConfig& cfg) {
    std::filesystem::create_directories(out_dir);

    // source duration = largest end among that source's segments
    std::map<std::string, double> source_duration;
    for (const SegmentRecord& r : manifest) {
        auto [it, inserted] = source_duration.try_emplace(r.source_id, r.end_s);
        if (!inserted) it->second = std::max(it->second, r.end_s);
    }

    SourceCache cache;
    ExtractSummary summary;
    for (const SegmentRecord& rec : manifest) {
        struct Job {
            ModalityId modality;
            const std::string* ref;
        };
        const Job jobs[] = {{ModalityId::Video, &rec.video_ref},
                            {ModalityId::Audio, &rec.audio_ref},
                            {ModalityId::Language, &rec.text_ref}};
        for (const Job& job : jobs) {
            if (*job.ref == "-" || job.ref->empty()) continue;
            try {
                FeatureVector fv;
                switch (job.modality) {
                    case ModalityId::Audio: {
                        auto it = cache.audio.find(*job.ref);
                        if (it == cache.audio.end())
                            it = cache.audio.emplace(*job.ref, read_wav(*job.ref)).first;
                        fv = segment_audio_features(rec, it->second, cfg.mel);
                        break;
                    }
                    case ModalityId::Video: {
                        auto it = cache.frames.find(*job.ref);
                        if (it == cache.frames.end())
                            it = cache.frames.emplace(*job.ref, read_frame_stack(*job.ref)).first;
                        fv = segment_video_features(rec, it->second, source_duration.at(rec.source_id));
                        break;
                    }
                    case ModalityId::Language: {
                        auto it = cache.text.find(*job.ref);
                        if (it == cache.text.end())
                            it = cache.text.emplace(*job.ref, read_text_file(*job.ref)).first;
                        fv = text_features(it->second, cfg.text_dim);
                        break;
                    }
                }
                write_feature_file(out_dir / feature_filename(rec.segment_id, job.modality),
                                   rec.segment_id, fv);
                ++summary.written;
            } catch (const Error& e) {
                log::warn("extract: " + rec.segment_id + "/" + std::string(to_string(job.modality)) + ": " +
                          e.what());
                summary.failures.push_back(
                    ExtractFailure{rec.segment_id, std::string(to_string(job.modality)), e.what()});
            }
        }
    }
    return summary;
}

}  // namespace trifuse
