#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hmog/graph.hpp"

namespace hmog {

/// Text format: a "hmog-checkpoint 1" line, then one line per parameter:
/// name rank dims... values... (shortest round-trip decimals).
std::string checkpoint_text(const std::vector<Parameter*>& params);
void save_checkpoint(const std::filesystem::path& path, const std::vector<Parameter*>& params);

/// Restores every parameter by name. Missing names, extra entries and shape
/// mismatches are errors.
void restore_checkpoint_text(const std::string& text, const std::vector<Parameter*>& params);
void load_checkpoint(const std::filesystem::path& path, const std::vector<Parameter*>& params);

}  // namespace hmog
