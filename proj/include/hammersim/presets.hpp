#pragma once

#include "hammersim/disturbance_model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace hammersim {

/// The fifteen measured mf-H anchors: double-sided, ARVRA and AAVAA columns.
std::vector<Anchor> mfh_anchors();

/// mf-A .. mf-H (analytic) and mf-H-table (table-driven over mfh_anchors()).
std::vector<std::string> preset_names();

/// Finalized preset profile. Throws ConfigError for unknown names.
ChipProfile preset_profile(std::string_view name);

/// Loads a preset by name, or a profile file by path when no preset matches.
ChipProfile resolve_profile(const std::string& name_or_path);

} // namespace hammersim
