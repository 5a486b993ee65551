#include "trifuse/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trifuse/io.hpp"

namespace trifuse {

std::string_view to_string(RawClass c) {
    switch (c) {
        case RawClass::CarAccident: return "Car Accident";
        case RawClass::Explosion: return "Explosion";
        case RawClass::Fighting: return "Fighting";
        case RawClass::Riot: return "Riot";
        case RawClass::Shooting: return "Shooting";
        case RawClass::Abuse: return "Abuse";
        case RawClass::NormalActivities: return "Normal Activities";
    }
    throw UsageError("unknown raw class");
}

RawClass parse_raw_class(std::string_view name) {
    for (RawClass c : kAllClasses)
        if (name == to_string(c)) return c;
    std::string valid;
    for (RawClass c : kAllClasses) {
        if (!valid.empty()) valid += ", ";
        valid += to_string(c);
    }
    throw DataError("unknown class '" + std::string(name) + "'; valid classes: " + valid);
}

std::string_view to_string(BinaryLabel l) {
    return l == BinaryLabel::Explicit ? "explicit" : "non-explicit";
}

BinaryLabel map_class(RawClass c) {
    return c == RawClass::NormalActivities ? BinaryLabel::NonExplicit : BinaryLabel::Explicit;
}

std::vector<std::pair<double, double>> segment_video(double duration_s, double max_len_s, double min_tail_s) {
    if (!(duration_s > 0)) throw UsageError("segment_video: duration must be positive");
    if (!(max_len_s > 0)) throw UsageError("segment_video: max segment length must be positive");
    if (min_tail_s < 0 || min_tail_s > max_len_s)
        throw UsageError("segment_video: min tail must lie in [0, max segment length]");

    std::vector<std::pair<double, double>> out;
    const auto n_full = static_cast<long>(std::floor(duration_s / max_len_s));
    for (long i = 0; i < n_full; ++i)
        out.emplace_back(static_cast<double>(i) * max_len_s, static_cast<double>(i + 1) * max_len_s);
    const double covered = static_cast<double>(n_full) * max_len_s;
    if (duration_s > covered) {
        const double tail = duration_s - covered;
        if (tail < min_tail_s && !out.empty()) {
            out.back().second = duration_s;  // merge the short tail
        } else {
            out.emplace_back(covered, duration_s);
        }
    }
    return out;
}

namespace {

// minimal CSV: comma-separated, optional double quotes around a field
std::vector<std::string> split_csv_line(const std::string& line, const std::string& context) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) throw DataError(context + ": unterminated quote");
    out.push_back(std::move(field));
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    return quoted + "\"";
}

double parse_seconds(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(context + ": bad time value '" + s + "'");
    }
}

constexpr const char* kManifestHeader =
    "segment_id,source_id,start_s,end_s,raw_class,split,video_ref,audio_ref,text_ref";

}  // namespace

std::vector<SegmentRecord> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("manifest is empty: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kManifestHeader)
        throw DataError(path.string() + ": bad manifest header; expected '" + kManifestHeader + "'");

    std::vector<SegmentRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string context = path.string() + ":" + std::to_string(line_no);
        std::vector<std::string> f = split_csv_line(line, context);
        if (f.size() != 9)
            throw DataError(context + ": expected 9 fields, got " + std::to_string(f.size()));
        SegmentRecord r;
        r.segment_id = f[0];
        r.source_id = f[1];
        r.start_s = parse_seconds(f[2], context);
        r.end_s = parse_seconds(f[3], context);
        r.raw_class = parse_raw_class(f[4]);
        r.binary_label = map_class(r.raw_class);
        r.split = f[5];
        r.video_ref = f[6];
        r.audio_ref = f[7];
        r.text_ref = f[8];
        if (r.segment_id.empty()) throw DataError(context + ": empty segment_id");
        if (r.start_s < 0 || r.start_s >= r.end_s)
            throw DataError(context + ": segment times must satisfy 0 <= start < end");
        if (r.split != "train" && r.split != "test")
            throw DataError(context + ": split must be 'train' or 'test', got '" + r.split + "'");
        out.push_back(std::move(r));
    }
    if (out.empty()) throw DataError(path.string() + ": manifest has no segment rows");
    return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<SegmentRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open manifest for writing: " + path.string());
    out << kManifestHeader << "\n";
    char buf[64];
    for (const SegmentRecord& r : records) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.start_s);
        std::string start = buf;
        std::snprintf(buf, sizeof(buf), "%.6f", r.end_s);
        std::string end = buf;
        out << csv_field(r.segment_id) << ',' << csv_field(r.source_id) << ',' << start << ',' << end << ','
            << csv_field(std::string(to_string(r.raw_class))) << ',' << r.split << ','
            << csv_field(r.video_ref) << ',' << csv_field(r.audio_ref) << ',' << csv_field(r.text_ref)
            << "\n";
    }
    if (!out) throw DataError("failed writing manifest: " + path.string());
}

std::vector<SourceRecord> read_sources(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open sources file: " + path.string());
    std::string line;
    constexpr const char* kHeader = "source_id,duration_s,raw_class,split,video_ref,audio_ref,text_ref";
    if (!std::getline(in, line)) throw DataError("sources file is empty: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw DataError(path.string() + ": bad sources header; expected '" + std::string(kHeader) + "'");

    std::vector<SourceRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string context = path.string() + ":" + std::to_string(line_no);
        std::vector<std::string> f = split_csv_line(line, context);
        if (f.size() != 7)
            throw DataError(context + ": expected 7 fields, got " + std::to_string(f.size()));
        SourceRecord r;
        r.source_id = f[0];
        r.duration_s = parse_seconds(f[1], context);
        r.raw_class = parse_raw_class(f[2]);
        r.split = f[3];
        r.video_ref = f[4];
        r.audio_ref = f[5];
        r.text_ref = f[6];
        if (r.source_id.empty()) throw DataError(context + ": empty source_id");
        if (!(r.duration_s > 0)) throw DataError(context + ": duration must be positive");
        if (r.split != "train" && r.split != "test")
            throw DataError(context + ": split must be 'train' or 'test', got '" + r.split + "'");
        out.push_back(std::move(r));
    }
    if (out.empty()) throw DataError(path.string() + ": sources file has no rows");
    return out;
}

std::vector<SegmentRecord> segment_sources(const std::vector<SourceRecord>& sources, double max_len_s,
                                           double min_tail_s) {
    std::vector<SegmentRecord> out;
    char buf[32];
    for (const SourceRecord& src : sources) {
        const auto intervals = segment_video(src.duration_s, max_len_s, min_tail_s);
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            SegmentRecord r;
            std::snprintf(buf, sizeof(buf), "-s%04zu", i);
            r.segment_id = src.source_id + buf;
            r.source_id = src.source_id;
            r.start_s = intervals[i].first;
            r.end_s = intervals[i].second;
            r.raw_class = src.raw_class;
            r.binary_label = map_class(src.raw_class);
            r.split = src.split;
            r.video_ref = src.video_ref;
            r.audio_ref = src.audio_ref;
            r.text_ref = src.text_ref;
            out.push_back(std::move(r));
        }
    }
    return out;
}

DataSplit split_records(std::vector<SegmentRecord> records) {
    DataSplit out;
    for (SegmentRecord& r : records) {
        if (r.split == "train")
            out.train.push_back(std::move(r));
        else
            out.test.push_back(std::move(r));
    }
    return out;
}

void attach_features(std::vector<SegmentRecord>& records, const std::filesystem::path& feature_dir,
                     const std::vector<ModalityId>& needed) {
    for (SegmentRecord& r : records) {
        for (ModalityId m : needed) {
            if (r.features.count(m)) continue;
            const std::filesystem::path file = feature_dir / feature_filename(r.segment_id, m);
            if (!std::filesystem::exists(file))
                throw DataError("segment " + r.segment_id + ": missing " + std::string(to_string(m)) +
                                " feature file " + file.string());
            r.features[m] = load_feature_file(file, m, -1).values;
        }
    }
}

std::map<ModalityId, Index> infer_widths(const std::vector<SegmentRecord>& records,
                                         const std::vector<ModalityId>& needed) {
    std::map<ModalityId, Index> widths;
    for (const SegmentRecord& r : records) {
        for (ModalityId m : needed) {
            auto it = r.features.find(m);
            if (it == r.features.end())
                throw DataError("segment " + r.segment_id + ": missing " + std::string(to_string(m)) +
                                " features");
            auto [w, inserted] = widths.try_emplace(m, it->second.size());
            if (!inserted && w->second != it->second.size())
                throw DataError("segment " + r.segment_id + ": " + std::string(to_string(m)) + " width " +
                                std::to_string(it->second.size()) + " disagrees with earlier width " +
                                std::to_string(w->second));
        }
    }
    return widths;
}

}  // namespace trifuse
