#pragma once

#include <filesystem>
#include <string>

#include "trifuse/features.hpp"

namespace trifuse {

// PCM WAV, 16-bit signed little-endian, mono. Anything else is rejected
// with a DataError naming the offending property.
AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

// Frame stack container: 8-byte magic "TRIFRAME", four 32-bit little-endian
// extents (frames, channels, height, width), then 32-bit little-endian
// floats in row-major order.
FrameStack read_frame_stack(const std::filesystem::path& path);
void write_frame_stack(const std::filesystem::path& path, const FrameStack& fs);

std::string read_text_file(const std::filesystem::path& path);

// One JSON object per (segment, modality):
// {"segment_id": str, "modality": "video"|"audio"|"language",
//  "dim": int, "values": [numbers]}
struct FeatureFile {
    std::string segment_id;
    FeatureVector feature;
};

void write_feature_file(const std::filesystem::path& path, const std::string& segment_id,
                        const FeatureVector& fv);
FeatureFile read_feature_file(const std::filesystem::path& path);

// Contract wrapper: validates modality and dimension before returning the
// vector; pass expected_dim < 0 to accept any width. Loaded vectors are
// marked external.
FeatureVector load_feature_file(const std::filesystem::path& path, ModalityId expected,
                                Index expected_dim);

// "<segment_id>.<modality>.json"
std::string feature_filename(const std::string& segment_id, ModalityId modality);

}  // namespace trifuse
