#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "trifuse/errors.hpp"

namespace trifuse {

// The three information channels of a segment. The enum order is the
// canonical order used for every concatenation and pair enumeration.
enum class ModalityId { Video = 0, Audio = 1, Language = 2 };

inline constexpr std::array<ModalityId, 3> kAllModalities{ModalityId::Video, ModalityId::Audio,
                                                          ModalityId::Language};

std::string_view to_string(ModalityId m);

// accepts "video" | "audio" | "language"
ModalityId parse_modality(std::string_view name);

// comma-separated list -> canonical-ordered, deduplicated set
std::vector<ModalityId> parse_modalities(std::string_view csv);

// sorts into canonical order, drops duplicates; rejects an empty set
std::vector<ModalityId> canonical_modalities(std::vector<ModalityId> mods);

}  // namespace trifuse
