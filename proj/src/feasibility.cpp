#include "hammersim/feasibility.hpp"

#include "hammersim/config.hpp"
#include "hammersim/engine.hpp"
#include "hammersim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace hammersim {

std::string_view to_string(CellStatus status)
{
    switch (status) {
    case CellStatus::Flippable: return "flippable";
    case CellStatus::Blocked: return "blocked";
    case CellStatus::Infeasible: return "infeasible";
    }
    return "?";
}

namespace {

constexpr std::uint64_t kNoLimit = std::numeric_limits<std::uint64_t>::max();

/// Near/edge aggressor multiplicity of each tracker key around X.
struct KeyLoad {
    std::uint64_t near = 0;
    std::uint64_t edge = 0;
};

std::vector<KeyLoad> key_loads(const DefenseConfig& d, RowId x)
{
    std::map<std::uint64_t, KeyLoad> keys;
    auto key = [&](std::uint32_t row) -> std::uint64_t {
        return d.kind == TrackerKind::GroupCounter ? row / d.group_size : row;
    };
    keys[key(x.row - 1)].near++;
    keys[key(x.row + 1)].near++;
    keys[key(x.row - 2)].edge++;
    keys[key(x.row + 2)].edge++;
    std::vector<KeyLoad> out;
    for (const auto& [_, v] : keys) out.push_back(v);
    return out;
}

/// Largest T keeping every key below t_mac at edge count S; nullopt if S
/// alone trips a key.
std::optional<std::uint64_t> max_t_below(const std::vector<KeyLoad>& loads, std::uint64_t t_mac,
                                         std::uint64_t S)
{
    std::uint64_t best = kNoLimit;
    for (const auto& k : loads) {
        const double used = static_cast<double>(k.edge) * static_cast<double>(S);
        if (used > static_cast<double>(t_mac - 1)) return std::nullopt;
        if (k.near == 0) continue;
        const auto left = t_mac - 1 - k.edge * S;
        best = std::min(best, left / k.near);
    }
    return best;
}

struct Bounds {
    std::uint64_t s_max = 0;
    std::uint64_t t_max = 0;
    std::uint64_t total = kNoLimit; // S + T
};

Bounds model_bounds(const FeasibilityOptions& o)
{
    const auto hc = static_cast<std::uint64_t>(std::floor(o.max_hc));
    Bounds b{hc, hc};
    if (o.model == AttackModel::DoubleSided) b.s_max = 0;
    if (o.model == AttackModel::ARVRA) b.t_max = 0;
    const auto budget = hammer_budget(o.timing);
    if (budget != kUnboundedBudget) b.total = budget >= 5 ? (budget - 5) / 2 : 0;
    return b;
}

/// Scans S and pairs each value with the largest admissible T.
template <typename MaxT>
void best_point(const ChipProfile& profile, const Bounds& b, MaxT max_t, double& intensity,
                std::uint64_t& best_s, std::uint64_t& best_t)
{
    intensity = 0;
    best_s = best_t = 0;
    const std::uint64_t s_hi = std::min(b.s_max, b.total);
    std::vector<std::uint64_t> candidates;
    const std::uint64_t steps = 4000;
    for (std::uint64_t i = 0; i <= steps; ++i) candidates.push_back(s_hi * i / steps);
    auto visit = [&](std::uint64_t S) {
        auto t = max_t(S);
        if (!t) return;
        const std::uint64_t T = std::min({*t, b.t_max, b.total - S});
        const double e = disturbance_intensity(profile, static_cast<double>(S), static_cast<double>(T));
        if (e > intensity) {
            intensity = e;
            best_s = S;
            best_t = T;
        }
    };
    for (auto S : candidates) visit(S);
    // Refine around the best grid value.
    const std::uint64_t width = s_hi / steps + 1;
    const std::uint64_t lo = best_s > width ? best_s - width : 0;
    const std::uint64_t hi = std::min(s_hi, best_s + width);
    const std::uint64_t stride = std::max<std::uint64_t>(1, (hi - lo) / 2000);
    for (std::uint64_t S = lo; S <= hi; S += stride) visit(S);
}

void check_address(const TargetCell& c, const DramGeometry& g)
{
    if (c.row.bank >= g.banks_per_chip || c.row.row >= g.rows_per_bank || c.bit >= g.row_size_bits)
        throw ConfigError("feasibility: cell (" + std::to_string(c.row.bank) + "," +
                          std::to_string(c.row.row) + "," + std::to_string(c.bit) +
                          ") is outside the geometry");
}

} // namespace

Reach reach_limits(const ChipProfile& profile, const DefenseConfig& defense, RowId x,
                   const FeasibilityOptions& options)
{
    if (x.row < 2 || std::uint64_t{x.row} + 2 >= options.geometry.rows_per_bank)
        throw LayoutError("feasibility: row " + std::to_string(x.row) + " cannot host the layout");
    defense.validate();
    const Bounds b = model_bounds(options);

    Reach r;
    auto open = [](std::uint64_t) -> std::optional<std::uint64_t> { return kNoLimit; };
    best_point(profile, b, open, r.open_intensity, r.open_S, r.open_T);

    if (!defense.policy.issues_nrr()) {
        r.bypass_intensity = r.open_intensity;
        r.bypass_S = r.open_S;
        r.bypass_T = r.open_T;
        return r;
    }
    const auto loads = key_loads(defense, x);
    const auto t_mac = defense.policy.t_mac;
    auto limited = [&](std::uint64_t S) { return max_t_below(loads, t_mac, S); };
    best_point(profile, b, limited, r.bypass_intensity, r.bypass_S, r.bypass_T);
    return r;
}

std::vector<CellVerdict> feasibility(const ChipProfile& profile, const DefenseConfig& defense,
                                     const std::vector<TargetCell>& cells,
                                     const FeasibilityOptions& options)
{
    options.geometry.validate();
    if (profile.cells_per_row > options.geometry.row_size_bits)
        throw ConfigError("profile has more weak cells per row than the row has bits");

    std::map<RowId, Reach> reach_cache;
    std::map<RowId, std::vector<double>> resistance_cache;
    std::vector<CellVerdict> out;
    for (const auto& c : cells) {
        check_address(c, options.geometry);
        CellVerdict v{c, CellStatus::Infeasible, std::numeric_limits<double>::infinity(), ""};
        RowId phys = c.row;
        if (options.map) phys.row = options.map->to_physical(c.row.row);

        if (c.from == c.to) {
            v.reason = "bit already holds the requested value";
            out.push_back(v);
            continue;
        }
        if (phys.row < 2 || std::uint64_t{phys.row} + 2 >= options.geometry.rows_per_bank) {
            v.reason = "row too close to the bank edge for an X+-2 layout";
            out.push_back(v);
            continue;
        }
        const auto k = weak_cell_at(c.bit, profile.cells_per_row, options.geometry.row_size_bits);
        if (!k) {
            v.reason = "no weak cell at this bit";
            out.push_back(v);
            continue;
        }
        auto rit = resistance_cache.find(phys);
        if (rit == resistance_cache.end())
            rit = resistance_cache.emplace(phys, cell_resistances(profile, row_seed(options.seed, phys))).first;
        v.threshold = rit->second[*k];

        auto it = reach_cache.find(phys);
        if (it == reach_cache.end()) it = reach_cache.emplace(phys, reach_limits(profile, defense, phys, options)).first;
        const Reach& r = it->second;

        std::ostringstream why;
        if (v.threshold <= r.bypass_intensity) {
            v.status = CellStatus::Flippable;
            why << "reached undetected at S=" << r.bypass_S << " T=" << r.bypass_T;
        } else if (v.threshold <= r.open_intensity) {
            v.status = CellStatus::Blocked;
            why << "needs more than the undetected maximum at S=" << r.bypass_S << " T=" << r.bypass_T;
        } else {
            why << "threshold above the reach of S=" << r.open_S << " T=" << r.open_T;
        }
        v.reason = why.str();
        out.push_back(v);
    }
    return out;
}

std::vector<TargetCell> parse_target_cells(std::string_view csv)
{
    std::vector<TargetCell> out;
    std::istringstream in{std::string(csv)};
    std::string line;
    int lineno = 0;
    auto bit = [&](const std::string& s, const char* what) {
        if (s != "0" && s != "1")
            throw ConfigError("cells CSV line " + std::to_string(lineno) + ": " + what + " must be 0 or 1");
        return s == "1";
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("bank", 0) == 0) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 5)
            throw ConfigError("cells CSV line " + std::to_string(lineno) +
                              ": expected bank,row,cell,from,to");
        TargetCell c;
        const auto bank = parse_uint(cols[0], "bank");
        const auto row = parse_uint(cols[1], "row");
        const auto cell = parse_uint(cols[2], "cell");
        if (bank > UINT32_MAX || row > UINT32_MAX || cell > UINT32_MAX)
            throw ConfigError("cells CSV line " + std::to_string(lineno) + ": address too large");
        c.row = {static_cast<std::uint32_t>(bank), static_cast<std::uint32_t>(row)};
        c.bit = static_cast<std::uint32_t>(cell);
        c.from = bit(cols[3], "from");
        c.to = bit(cols[4], "to");
        out.push_back(c);
    }
    return out;
}

void write_verdicts_csv(std::ostream& out, const std::vector<CellVerdict>& verdicts)
{
    out << "bank,row,cell,from,to,status,threshold,reason\n";
    for (const auto& v : verdicts) {
        char thr[64];
        if (std::isinf(v.threshold))
            std::snprintf(thr, sizeof thr, "inf");
        else
            std::snprintf(thr, sizeof thr, "%.6g", v.threshold);
        out << v.cell.row.bank << ',' << v.cell.row.row << ',' << v.cell.bit << ',' << v.cell.from << ','
            << v.cell.to << ',' << to_string(v.status) << ',' << thr << ',' << v.reason << '\n';
    }
}

} // namespace hammersim
