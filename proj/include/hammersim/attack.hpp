#pragma once

#include "hammersim/dram_model.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace hammersim {

enum class AttackModel { DoubleSided, ARVRA, AAVAA };

/// Order in which the near (X+-1) and edge (X+-2) hammer loops are issued.
enum class Interleaving { Sequential, RoundRobin };

/// One multi-sided hammering experiment. S counts activations of each edge
/// aggressor (X+-2), T of each near aggressor (X+-1).
struct AttackConfig {
    AttackModel model = AttackModel::AAVAA;
    DramGeometry geometry;
    RowId target{0, 100};
    std::uint64_t S = 0;
    std::uint64_t T = 0;
    RowData aggressor_pattern;
    RowData victim_pattern;
    Interleaving interleaving = Interleaving::RoundRobin;

    /// Fills empty patterns with all-ones aggressors and all-zeros victims.
    void apply_default_patterns();

    /// Throws ConfigError/LayoutError if the config is inconsistent:
    /// DoubleSided needs S = 0, ARVRA needs T = 0, X+-2 must exist.
    void validate() const;

    /// DoubleSided when S = 0, ARVRA when T = 0, otherwise AAVAA.
    static AttackModel model_for(std::uint64_t S, std::uint64_t T);
};

std::string_view to_string(AttackModel model);
AttackModel parse_attack_model(std::string_view text);
std::string_view to_string(Interleaving mode);
Interleaving parse_interleaving(std::string_view text);

} // namespace hammersim
