#pragma once

#include "metarl/meta.hpp"

#include <filesystem>

namespace metarl {

/// Everything needed to resume or evaluate a controller: actor, critic, both
/// targets, the encoder, and all optimizer state, plus the variant/state
/// conventions. Round-trips are bit-exact.
void save_checkpoint(const std::filesystem::path& path, const MetaSystem& sys);
MetaSystem load_checkpoint(const std::filesystem::path& path);

}  // namespace metarl
