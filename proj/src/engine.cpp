#include "hammersim/engine.hpp"

#include "disturbance_internal.hpp"
#include "hammersim/error.hpp"
#include "rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace hammersim {

std::uint64_t row_seed(std::uint64_t seed, RowId row)
{
    return detail::hash_combine(detail::hash_combine(seed, row.bank), row.row);
}

std::uint32_t weak_cell_bit(std::uint32_t k, std::uint32_t cells_per_row, std::uint32_t row_bits)
{
    return static_cast<std::uint32_t>(std::uint64_t{k} * row_bits / cells_per_row);
}

std::optional<std::uint32_t> weak_cell_at(std::uint32_t bit, std::uint32_t cells_per_row,
                                          std::uint32_t row_bits)
{
    const std::uint64_t k = (std::uint64_t{bit} * cells_per_row + row_bits - 1) / row_bits;
    if (k >= cells_per_row) return std::nullopt;
    if (weak_cell_bit(static_cast<std::uint32_t>(k), cells_per_row, row_bits) != bit) return std::nullopt;
    return static_cast<std::uint32_t>(k);
}

// ---------------------------------------------------------------------------
// Simulation

Simulation::Simulation(const ChipProfile& profile, const AttackConfig& attack,
                       const TimingParams& timing, const std::optional<DefenseConfig>& defense)
    : profile_(&profile), attack_(attack), timing_(timing)
{
    attack_.apply_default_patterns();
    attack_.validate();
    timing_.validate();
    if (profile.cells_per_row > attack_.geometry.row_size_bits)
        throw ConfigError("profile has more weak cells per row than the row has bits");
    if (profile.mode == ProfileMode::TableDriven && !profile.table)
        throw ConfigError("profile '" + profile.vendor_id + "' is not finalized");
    array_ = init_attack_layout(attack_.geometry, attack_.target, attack_.aggressor_pattern,
                                attack_.victim_pattern);
    for (auto row : array_.tracked_rows()) victims_.push_back({row});
    if (defense) defense_.emplace(*defense, attack_.geometry);
}

Simulation::Victim* Simulation::find(RowId row)
{
    for (auto& v : victims_)
        if (v.row == row) return &v;
    return nullptr;
}

const Simulation::Victim* Simulation::find(RowId row) const
{
    return const_cast<Simulation*>(this)->find(row);
}

double Simulation::fraction(const Victim& v) const
{
    if (v.near_acts == 0 && v.edge_acts == 0) return 0.0;
    return detail::flip_fraction(*profile_, 0.5 * static_cast<double>(v.edge_acts),
                                 0.5 * static_cast<double>(v.near_acts));
}

void Simulation::close_episode(Victim& v)
{
    v.peak = std::max(v.peak, fraction(v));
    v.near_acts = 0;
    v.edge_acts = 0;
}

void Simulation::add_hammers(RowId row, std::uint64_t count)
{
    for (auto& v : victims_) {
        if (v.row.bank != row.bank) continue;
        const auto d = v.row.row > row.row ? v.row.row - row.row : row.row - v.row.row;
        if (d == 1) v.near_acts += count;
        if (d == 2) v.edge_acts += count;
    }
}

std::vector<NrrEvent> Simulation::activate(RowId row, std::uint64_t tick)
{
    add_hammers(row, 1);
    if (!defense_) return {};
    auto events = defense_->observe_activate(row, tick);
    for (const auto& ev : events)
        for (auto r : ev.refreshed) refresh(r);
    return events;
}

void Simulation::refresh(RowId row)
{
    if (Victim* v = find(row)) close_episode(*v);
}

void Simulation::refresh_all(std::uint64_t tick)
{
    for (auto& v : victims_) close_episode(v);
    if (defense_) defense_->window_rollover(tick);
}

double Simulation::current_fraction(RowId row) const
{
    const Victim* v = find(row);
    return v ? fraction(*v) : 0.0;
}

double Simulation::peak_fraction(RowId row) const
{
    const Victim* v = find(row);
    return v ? std::max(v->peak, fraction(*v)) : 0.0;
}

std::map<RowId, std::uint64_t> Simulation::readback(std::uint64_t seed)
{
    // Row X first: the direction rule of X looks at X+-1, which may
    // themselves be disturbed.
    std::vector<const Victim*> order;
    for (const auto& v : victims_) order.push_back(&v);
    std::stable_partition(order.begin(), order.end(),
                          [&](const Victim* v) { return v->row == attack_.target; });

    const std::uint32_t n = profile_->cells_per_row;
    const std::uint32_t bits = attack_.geometry.row_size_bits;
    for (const Victim* v : order) {
        const double p = std::max(v->peak, fraction(*v));
        if (p <= 0) continue;
        const auto level = detail::cell_levels(*profile_, row_seed(seed, v->row));
        std::vector<std::uint32_t> flipped;
        for (std::uint32_t k = 0; k < n; ++k)
            if (level[k] <= p) flipped.push_back(weak_cell_bit(k, n, bits));
        array_.disturb(v->row, flipped);
    }
    std::map<RowId, std::uint64_t> out;
    for (const auto& v : victims_) out[v.row] = array_.net_flips(v.row);
    return out;
}

// ---------------------------------------------------------------------------
// Runs

FlipReport run_attack(const ChipProfile& profile, const AttackConfig& attack_in,
                      const std::optional<DefenseConfig>& defense, const TimingParams& timing,
                      std::uint64_t seed)
{
    AttackConfig attack = attack_in;
    attack.apply_default_patterns();
    attack.validate();
    timing.validate();
    check_budget(attack, timing);

    Simulation sim(profile, attack, timing, defense);
    const RowId x = attack.target;
    if (defense && defense->policy.issues_nrr()) {
        const std::uint64_t cycle = timing.row_cycle_ck();
        std::uint64_t tick = 0;
        for_each_hammer(attack, [&](RowId row) {
            sim.activate(row, tick);
            tick += cycle;
        });
    } else {
        // Nothing can refresh mid-run: only the totals matter.
        sim.add_hammers({x.bank, x.row - 1}, attack.T);
        sim.add_hammers({x.bank, x.row + 1}, attack.T);
        sim.add_hammers({x.bank, x.row - 2}, attack.S);
        sim.add_hammers({x.bank, x.row + 2}, attack.S);
    }

    FlipReport r;
    r.model = attack.model;
    r.target = x;
    r.S = attack.S;
    r.T = attack.T;
    r.seed = seed;
    r.flips_per_row = sim.readback(seed);
    r.total_flips_target_row = r.flips_per_row.at(x);
    r.total_acts = 2 * (attack.S + attack.T);
    const auto est = estimate_flips(profile, static_cast<double>(attack.S), static_cast<double>(attack.T));
    r.expected_flips = est.flips;
    r.extrapolated = est.extrapolated;
    if (defense) {
        r.defense = defense->label();
        r.nrr_log = sim.defense() ? sim.defense()->nrr_log() : std::vector<NrrEvent>{};
    }
    r.nrr_count = r.nrr_log.size();
    r.detected = r.nrr_count > 0;
    r.bypassed = !r.detected;
    return r;
}

bool attack_detected(const AttackConfig& attack, const DefenseConfig& defense,
                     const TimingParams& timing)
{
    if (!defense.policy.issues_nrr()) return false;
    DefenseState state(defense, attack.geometry);
    const std::uint64_t cycle = timing.row_cycle_ck();
    std::uint64_t tick = 0;
    bool hit = false;
    for_each_hammer(attack, [&](RowId row) {
        hit = !state.observe_activate(row, tick).empty();
        tick += cycle;
        return !hit;
    });
    return hit;
}

namespace {

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string count(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
}

} // namespace

void write_report(std::ostream& out, const FlipReport& r)
{
    out << "model = " << to_string(r.model) << "\n"
        << "bank = " << r.target.bank << "\n"
        << "row = " << r.target.row << "\n"
        << "S = " << r.S << "\n"
        << "T = " << r.T << "\n"
        << "seed = " << r.seed << "\n"
        << "total_acts = " << r.total_acts << "\n"
        << "expected_flips = " << fmt(r.expected_flips) << "\n"
        << "extrapolated = " << (r.extrapolated ? "true" : "false") << "\n"
        << "total_flips_target_row = " << r.total_flips_target_row << "\n"
        << "defense = " << (r.defense.empty() ? "none" : r.defense) << "\n"
        << "detected = " << (r.detected ? "true" : "false") << "\n"
        << "bypassed = " << (r.bypassed ? "true" : "false") << "\n"
        << "nrr_count = " << r.nrr_count << "\n";
    for (const auto& [row, n] : r.flips_per_row) out << "flips_" << row.row << " = " << n << "\n";
}

void write_report_csv(std::ostream& out, const FlipReport& r)
{
    out << "bank,row,net_flips\n";
    for (const auto& [row, n] : r.flips_per_row) out << row.bank << ',' << row.row << ',' << n << '\n';
}

// ---------------------------------------------------------------------------
// Sweeps

Surface sweep(const ChipProfile& profile, const AttackConfig& base, const std::vector<double>& s_values,
              const std::vector<double>& t_values, const std::vector<DefenseConfig>& defenses,
              const TimingParams& timing, std::uint64_t seed, unsigned threads)
{
    if (s_values.empty() || t_values.empty()) throw ConfigError("sweep: empty S or T grid");
    for (double v : s_values)
        if (!(v >= 0) || v != std::floor(v)) throw ConfigError("sweep: S values must be non-negative integers");
    for (double v : t_values)
        if (!(v >= 0) || v != std::floor(v)) throw ConfigError("sweep: T values must be non-negative integers");

    Surface surface;
    surface.s_values = s_values;
    surface.t_values = t_values;
    for (const auto& d : defenses) surface.defenses.push_back(d.label());
    surface.cells.resize(s_values.size() * t_values.size());

    auto evaluate = [&](std::size_t idx) {
        const double S = s_values[idx / t_values.size()];
        const double T = t_values[idx % t_values.size()];
        AttackConfig a = base;
        a.S = static_cast<std::uint64_t>(S);
        a.T = static_cast<std::uint64_t>(T);
        a.model = AttackConfig::model_for(a.S, a.T);
        SurfaceCell& c = surface.cells[idx];
        c.S = S;
        c.T = T;
        const FlipReport r = run_attack(profile, a, std::nullopt, timing, seed);
        c.expected_flips = r.expected_flips;
        c.sampled_flips = r.total_flips_target_row;
        for (const auto& d : defenses) c.detected.push_back(attack_detected(a, d, timing));
    };

    const std::size_t total = surface.cells.size();
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
    if (workers == 1) {
        for (std::size_t i = 0; i < total; ++i) evaluate(i);
        return surface;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < total; i = next++) {
                try {
                    evaluate(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return surface;
}

std::vector<double> log_axis(double lo, double hi, std::size_t points)
{
    if (!(lo > 0) || !(hi >= lo) || points < 1) throw ConfigError("log axis: need 0 < lo <= hi and points >= 1");
    std::vector<double> axis{0.0};
    for (std::size_t i = 0; i < points; ++i) {
        const double f = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        axis.push_back(std::round(lo * std::pow(hi / lo, f)));
    }
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
    return axis;
}

void write_surface_csv(std::ostream& out, const Surface& s)
{
    out << "S,T,expected_flips,sampled_flips";
    for (const auto& d : s.defenses) out << ",detected_" << d;
    out << '\n';
    for (const auto& c : s.cells) {
        out << count(c.S) << ',' << count(c.T) << ',' << fmt(c.expected_flips) << ',' << c.sampled_flips;
        for (bool d : c.detected) out << ',' << (d ? 1 : 0);
        out << '\n';
    }
}

void write_surface_matrix(std::ostream& out, const Surface& s)
{
    out << s.t_values.size();
    for (double t : s.t_values) out << ' ' << count(t);
    out << '\n';
    for (std::size_t i = 0; i < s.s_values.size(); ++i) {
        out << count(s.s_values[i]);
        for (std::size_t j = 0; j < s.t_values.size(); ++j) out << ' ' << fmt(s.at(i, j).expected_flips);
        out << '\n';
    }
}

std::optional<OptimalSet> find_optimal_set(const Surface& surface, double flip_target,
                                           std::optional<double> bound)
{
    std::vector<GridPoint> points;
    points.reserve(surface.cells.size());
    for (const auto& c : surface.cells) points.push_back({c.S, c.T, c.expected_flips});
    return select_optimal_set(points, flip_target, bound);
}

double threshold_ratio(const OptimalSet& set) { return (set.S + set.T) / set.t_dbl; }

} // namespace hammersim
