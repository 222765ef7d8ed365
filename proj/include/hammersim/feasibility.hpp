#pragma once

#include "hammersim/attack.hpp"
#include "hammersim/defense.hpp"
#include "hammersim/disturbance_model.hpp"
#include "hammersim/dram_model.hpp"
#include "hammersim/trace_engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hammersim {

/// A victim bit the attacker wants to move from `from` to `to`. The row is a
/// logical index unless no physical map is given.
struct TargetCell {
    RowId row;
    std::uint32_t bit = 0;
    bool from = false;
    bool to = true;
};

enum class CellStatus { Flippable, Blocked, Infeasible };
std::string_view to_string(CellStatus status);

struct CellVerdict {
    TargetCell cell;
    CellStatus status = CellStatus::Infeasible;
    double threshold = 0; // resistance on the intensity scale; +inf if not a weak cell
    std::string reason;
};

struct FeasibilityOptions {
    AttackModel model = AttackModel::AAVAA; // which (S, T) shapes the attacker may use
    DramGeometry geometry;
    TimingParams timing;
    double max_hc = 10e6; // per-aggressor search bound
    std::uint64_t seed = 1;
    std::optional<PhysicalMap> map;
};

/// Highest disturbance intensity reachable on row X under the attack model,
/// with and without staying below the defense's detection limit.
struct Reach {
    double bypass_intensity = 0;
    std::uint64_t bypass_S = 0;
    std::uint64_t bypass_T = 0;
    double open_intensity = 0;
    std::uint64_t open_S = 0;
    std::uint64_t open_T = 0;
};

/// Bypassing means no tracker key (row, or group for GroupCounter) reaches
/// t_mac: for every key, (near rows in key) * T + (edge rows in key) * S <
/// t_mac. This is exact for per-row and group counters and for Misra-Gries
/// tables with at least four counters; smaller tables underestimate, so the
/// region is then a conservative inner bound. Row X must admit the layout.
Reach reach_limits(const ChipProfile& profile, const DefenseConfig& defense, RowId x,
                   const FeasibilityOptions& options);

/// Flippable iff some bypassing (S, T) drives the cell's threshold and the
/// direction rule allows from -> to with attacker-chosen aggressor data;
/// blocked iff only detected configurations reach it; infeasible otherwise.
/// Throws ConfigError on addresses outside the geometry.
std::vector<CellVerdict> feasibility(const ChipProfile& profile, const DefenseConfig& defense,
                                     const std::vector<TargetCell>& cells,
                                     const FeasibilityOptions& options);

/// CSV with header bank,row,cell,from,to (from/to are 0 or 1).
std::vector<TargetCell> parse_target_cells(std::string_view csv);
/// CSV with header bank,row,cell,from,to,status,threshold,reason.
void write_verdicts_csv(std::ostream& out, const std::vector<CellVerdict>& verdicts);

} // namespace hammersim
