#pragma once

#include <filesystem>

#include "trifuse/fusion.hpp"

namespace trifuse {

// Versioned JSON container: strategy tag, dims, canonical modality list and
// all parameter arrays in row-major order. save -> load -> save reproduces
// the file byte for byte.
void save_checkpoint(const FusionModel& model, const std::filesystem::path& path);
FusionModel load_checkpoint(const std::filesystem::path& path);

// in-memory forms, used by the file functions and by tests
std::string checkpoint_to_json(const FusionModel& model);
FusionModel checkpoint_from_json(const std::string& text);

}  // namespace trifuse
