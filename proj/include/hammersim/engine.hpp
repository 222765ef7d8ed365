#pragma once

#include "hammersim/attack.hpp"
#include "hammersim/defense.hpp"
#include "hammersim/disturbance_model.hpp"
#include "hammersim/dram_model.hpp"
#include "hammersim/trace_engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hammersim {

/// Seed of one row realisation, derived from the run seed and the address.
std::uint64_t row_seed(std::uint64_t seed, RowId row);

/// Bit position of weak cell k when cells_per_row weak cells are spread
/// evenly over row_bits cells.
std::uint32_t weak_cell_bit(std::uint32_t k, std::uint32_t cells_per_row, std::uint32_t row_bits);
/// Inverse of weak_cell_bit; nullopt if no weak cell sits at `bit`.
std::optional<std::uint32_t> weak_cell_at(std::uint32_t bit, std::uint32_t cells_per_row,
                                          std::uint32_t row_bits);

struct FlipReport {
    AttackModel model = AttackModel::AAVAA;
    RowId target;
    std::uint64_t S = 0;
    std::uint64_t T = 0;
    std::uint64_t seed = 0;
    std::map<RowId, std::uint64_t> flips_per_row; // net flips at readback
    std::uint64_t total_flips_target_row = 0;
    std::uint64_t total_acts = 0;
    double expected_flips = 0; // model value for row X at (S, T), ignoring NRRs
    bool extrapolated = false;
    std::string defense; // label, empty without defense
    bool detected = false;
    bool bypassed = true;
    std::uint64_t nrr_count = 0;
    std::vector<NrrEvent> nrr_log;
};

/// "key = value" summary followed by one flips_<row> line per tracked row.
void write_report(std::ostream& out, const FlipReport& report);
/// CSV with header bank,row,net_flips.
void write_report_csv(std::ostream& out, const FlipReport& report);

/// Step-wise simulation of one attack layout. Every activation disturbs the
/// tracked rows X-2..X+2: a distance-1 activation adds half a near hammer, a
/// distance-2 activation half an edge hammer (so T iterations on X+-1 give
/// row X exactly T). A refresh of a row ends its disturbance episode; cells
/// flip if their resistance lies below the peak intensity of any episode,
/// which equals flipping at the first threshold crossing.
class Simulation {
public:
    Simulation(const ChipProfile& profile, const AttackConfig& attack, const TimingParams& timing,
               const std::optional<DefenseConfig>& defense = std::nullopt);

    /// One ACT: disturbs neighbours, then lets the defense react. Returns the
    /// NRRs it triggered; their refreshes are already applied.
    std::vector<NrrEvent> activate(RowId row, std::uint64_t tick);

    /// `count` ACTs of the same row without defense observation.
    void add_hammers(RowId row, std::uint64_t count);

    /// Refreshes one row (NRR or auto-refresh); untracked rows are ignored.
    void refresh(RowId row);

    /// Auto-refresh of every row at a tREFW boundary; rolls the defense window.
    void refresh_all(std::uint64_t tick);

    /// Applies every flip earned so far through the direction rule and
    /// returns per-row net flips. Safe to call repeatedly.
    std::map<RowId, std::uint64_t> readback(std::uint64_t seed);

    /// Expected-flip fraction of `row` at its current accumulators.
    double current_fraction(RowId row) const;
    /// Highest fraction reached by `row` in any episode so far.
    double peak_fraction(RowId row) const;

    const DramArrayState& array() const noexcept { return array_; }
    const DefenseState* defense() const noexcept { return defense_ ? &*defense_ : nullptr; }

private:
    struct Victim {
        RowId row;
        std::uint64_t near_acts = 0; // ACTs issued to distance-1 rows
        std::uint64_t edge_acts = 0; // ACTs issued to distance-2 rows
        double peak = 0;
    };
    Victim* find(RowId row);
    const Victim* find(RowId row) const;
    double fraction(const Victim& v) const;
    void close_episode(Victim& v);

    const ChipProfile* profile_;
    AttackConfig attack_;
    TimingParams timing_;
    DramArrayState array_;
    std::optional<DefenseState> defense_;
    std::vector<Victim> victims_;
};

/// End-to-end run: compile-time budget check, hammering (replayed ACT by ACT
/// through the defense when it can issue NRRs), readback.
/// Throws BudgetError when refresh is enabled and the schedule overflows tREFW.
FlipReport run_attack(const ChipProfile& profile, const AttackConfig& attack,
                      const std::optional<DefenseConfig>& defense, const TimingParams& timing,
                      std::uint64_t seed);

/// Whether the defense issues any NRR while the attack runs. Stops at the
/// first NRR.
bool attack_detected(const AttackConfig& attack, const DefenseConfig& defense,
                     const TimingParams& timing);

struct SurfaceCell {
    double S = 0;
    double T = 0;
    double expected_flips = 0;
    std::uint64_t sampled_flips = 0;
    std::vector<bool> detected; // parallel to Surface::defenses
};

struct Surface {
    std::vector<double> s_values;
    std::vector<double> t_values;
    std::vector<std::string> defenses; // labels
    std::vector<SurfaceCell> cells;    // row-major: S outer, T inner

    const SurfaceCell& at(std::size_t i, std::size_t j) const { return cells[i * t_values.size() + j]; }
};

/// One cell per (S, T). `base` supplies target, geometry, patterns and
/// interleaving; the model follows from each (S, T). Cells are independent
/// and evaluated on `threads` workers; content does not depend on the count.
Surface sweep(const ChipProfile& profile, const AttackConfig& base, const std::vector<double>& s_values,
              const std::vector<double>& t_values, const std::vector<DefenseConfig>& defenses,
              const TimingParams& timing, std::uint64_t seed, unsigned threads = 1);

/// 0 followed by `points` log-spaced counts from lo to hi, rounded.
std::vector<double> log_axis(double lo, double hi, std::size_t points);

/// S,T,expected_flips,sampled_flips,detected_<label>...
void write_surface_csv(std::ostream& out, const Surface& surface);
/// gnuplot "nonuniform matrix" of expected flips: first line holds the
/// column count and the T values, each further line an S value and its row.
void write_surface_matrix(std::ostream& out, const Surface& surface);

/// Optimal set on a defense-free surface (see select_optimal_set).
std::optional<OptimalSet> find_optimal_set(const Surface& surface, double flip_target,
                                           std::optional<double> bound = std::nullopt);

/// (S+T) / T_dbl of an optimal set: how many more total hammers the
/// sub-threshold attack spends than the double-sided one.
double threshold_ratio(const OptimalSet& set);

} // namespace hammersim
