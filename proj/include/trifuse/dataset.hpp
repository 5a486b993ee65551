#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "trifuse/fusion.hpp"
#include "trifuse/modality.hpp"

namespace trifuse {

// The seven XD-Violence content classes.
enum class RawClass {
    CarAccident,
    Explosion,
    Fighting,
    Riot,
    Shooting,
    Abuse,
    NormalActivities,
};

inline constexpr std::array<RawClass, 7> kAllClasses{
    RawClass::CarAccident, RawClass::Explosion, RawClass::Fighting,  RawClass::Riot,
    RawClass::Shooting,    RawClass::Abuse,     RawClass::NormalActivities,
};

enum class BinaryLabel { NonExplicit = 0, Explicit = 1 };

std::string_view to_string(RawClass c);
RawClass parse_raw_class(std::string_view name);  // unknown -> DataError listing valid classes
std::string_view to_string(BinaryLabel l);

// Normal Activities -> NonExplicit, the six violence classes -> Explicit.
BinaryLabel map_class(RawClass c);

// classifier output index: 0 = NonExplicit, 1 = Explicit
inline int label_index(BinaryLabel l) { return static_cast<int>(l); }

// One clip of at most a minute (module the tail-merge rule below) with its
// class, binary label and per-modality payload references.
struct SegmentRecord {
    std::string segment_id;
    std::string source_id;
    double start_s = 0.0;
    double end_s = 0.0;
    RawClass raw_class = RawClass::NormalActivities;
    BinaryLabel binary_label = BinaryLabel::NonExplicit;
    std::string split = "train";  // "train" | "test"
    std::string video_ref = "-";
    std::string audio_ref = "-";
    std::string text_ref = "-";
    FeatureMap features;  // inline features, filled by synth or attach_features

    double duration_s() const { return end_s - start_s; }
};

// Consecutive [start, end) intervals of length max_len_s covering
// [0, duration). A final remainder shorter than min_tail_s is merged into
// the previous interval, so the last interval may be up to
// max_len_s + min_tail_s long.
std::vector<std::pair<double, double>> segment_video(double duration_s, double max_len_s = 60.0,
                                                     double min_tail_s = 5.0);

// ---- manifest CSV ----
// header: segment_id,source_id,start_s,end_s,raw_class,split,video_ref,audio_ref,text_ref
// refs are file paths or "-"

std::vector<SegmentRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<SegmentRecord>& records);

// ---- sources CSV ----
// header: source_id,duration_s,raw_class,split,video_ref,audio_ref,text_ref

struct SourceRecord {
    std::string source_id;
    double duration_s = 0.0;
    RawClass raw_class = RawClass::NormalActivities;
    std::string split = "train";
    std::string video_ref = "-";
    std::string audio_ref = "-";
    std::string text_ref = "-";
};

std::vector<SourceRecord> read_sources(const std::filesystem::path& path);

// Expands each source into segment rows via segment_video. Segment ids are
// "<source_id>-s<index>"; class, split and payload refs are inherited.
std::vector<SegmentRecord> segment_sources(const std::vector<SourceRecord>& sources, double max_len_s = 60.0,
                                           double min_tail_s = 5.0);

struct DataSplit {
    std::vector<SegmentRecord> train;
    std::vector<SegmentRecord> test;
};

DataSplit split_records(std::vector<SegmentRecord> records);

// Loads <feature_dir>/<segment_id>.<modality>.json for every record and
// requested modality that is not already inline. Missing or malformed
// files raise a DataError naming the segment and modality.
void attach_features(std::vector<SegmentRecord>& records, const std::filesystem::path& feature_dir,
                     const std::vector<ModalityId>& needed);

// widths of the requested modalities taken from the records (which must
// agree with each other); DataError names the first offending segment
std::map<ModalityId, Index> infer_widths(const std::vector<SegmentRecord>& records,
                                         const std::vector<ModalityId>& needed);

}  // namespace trifuse
