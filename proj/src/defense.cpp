#include "hammersim/defense.hpp"

#include "hammersim/config.hpp"
#include "hammersim/error.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace hammersim {

void MacPolicy::validate() const
{
    if (kind == Kind::Limit && t_mac < 1) throw ConfigError("defense: t_mac must be >= 1");
}

std::string to_string(const MacPolicy& policy)
{
    switch (policy.kind) {
    case MacPolicy::Kind::Unlimited: return "unlimited";
    case MacPolicy::Kind::Untested: return "untested";
    case MacPolicy::Kind::Limit: return std::to_string(policy.t_mac);
    }
    return "?";
}

MacPolicy parse_mac_policy(std::string_view text)
{
    const std::string t = trim(text);
    if (t == "unlimited") return MacPolicy::unlimited();
    if (t == "untested") return MacPolicy::untested();
    const auto n = parse_uint(t, "t_mac");
    if (n < 1) throw ConfigError("defense: t_mac must be >= 1");
    return MacPolicy::limit(n);
}

std::string_view to_string(TrackerKind kind)
{
    switch (kind) {
    case TrackerKind::PerRowCounter: return "PerRowCounter";
    case TrackerKind::GroupCounter: return "GroupCounter";
    case TrackerKind::FrequentItem: return "FrequentItem";
    }
    return "?";
}

TrackerKind parse_tracker_kind(std::string_view text)
{
    if (text == "PerRowCounter" || text == "per_row") return TrackerKind::PerRowCounter;
    if (text == "GroupCounter" || text == "group") return TrackerKind::GroupCounter;
    if (text == "FrequentItem" || text == "misra_gries") return TrackerKind::FrequentItem;
    throw ConfigError("unknown defense kind '" + std::string(text) + "'");
}

void DefenseConfig::validate() const
{
    policy.validate();
    if (kind == TrackerKind::GroupCounter && group_size < 1)
        throw ConfigError("defense: group_size must be >= 1");
    if (kind == TrackerKind::FrequentItem && num_counters < 1)
        throw ConfigError("defense: num_counters must be >= 1");
}

std::string DefenseConfig::label() const
{
    if (!name.empty()) return name;
    return std::string(to_string(kind)) + "@" + to_string(policy);
}

DefenseState::DefenseState(const DefenseConfig& config, const DramGeometry& geometry,
                           std::uint64_t window_start)
    : config_(config), geometry_(geometry), window_start_(window_start)
{
    config_.validate();
    geometry_.validate();
    const std::size_t rows = std::size_t{geometry.banks_per_chip} * geometry.rows_per_bank;
    if (config_.kind == TrackerKind::PerRowCounter) counters_.assign(rows, 0);
    if (config_.kind == TrackerKind::GroupCounter) {
        const std::size_t groups_per_bank =
            (geometry.rows_per_bank + config_.group_size - 1) / config_.group_size;
        counters_.assign(groups_per_bank * geometry.banks_per_chip, 0);
    }
    if (config_.kind == TrackerKind::FrequentItem) table_.reserve(config_.num_counters);
}

std::size_t DefenseState::slot(RowId row) const
{
    if (config_.kind == TrackerKind::GroupCounter) {
        const std::size_t groups_per_bank =
            (geometry_.rows_per_bank + config_.group_size - 1) / config_.group_size;
        return std::size_t{row.bank} * groups_per_bank + row.row / config_.group_size;
    }
    return std::size_t{row.bank} * geometry_.rows_per_bank + row.row;
}

std::vector<RowId> DefenseState::refresh_set(RowId row) const
{
    if (config_.kind != TrackerKind::GroupCounter) return adjacent_rows(geometry_.rows_per_bank, row, 1);

    // The whole group plus the row on either side of it.
    const std::uint32_t first = row.row / config_.group_size * config_.group_size;
    const std::uint64_t last =
        std::min<std::uint64_t>(std::uint64_t{first} + config_.group_size, geometry_.rows_per_bank) - 1;
    std::vector<RowId> out;
    const std::uint32_t lo = first > 0 ? first - 1 : first;
    const std::uint64_t hi = std::min<std::uint64_t>(last + 1, geometry_.rows_per_bank - 1);
    for (std::uint64_t r = lo; r <= hi; ++r) out.push_back({row.bank, static_cast<std::uint32_t>(r)});
    return out;
}

// Misra-Gries with decrement-all: returns true when the key's estimate
// reaches t_mac.
bool DefenseState::misra_gries_observe(std::size_t key)
{
    for (auto& e : table_) {
        if (e.key == key) return ++e.count >= config_.policy.t_mac && config_.policy.issues_nrr();
    }
    if (table_.size() < config_.num_counters) {
        table_.push_back({key, 1});
        return config_.policy.issues_nrr() && config_.policy.t_mac <= 1;
    }
    for (auto& e : table_) --e.count;
    std::erase_if(table_, [](const MgEntry& e) { return e.count == 0; });
    return false;
}

std::vector<NrrEvent> DefenseState::observe_activate(RowId row, std::uint64_t tick)
{
    if (tick < window_start_)
        throw std::invalid_argument("observe_activate: tick precedes the window start");
    if (row.bank >= geometry_.banks_per_chip || row.row >= geometry_.rows_per_bank)
        throw std::invalid_argument("observe_activate: row outside the geometry");

    const std::size_t key = slot(row);
    bool trip = false;
    if (config_.kind == TrackerKind::FrequentItem) {
        trip = misra_gries_observe(key);
    } else {
        auto& c = counters_[key];
        if (c == 0) touched_.push_back(key);
        ++c;
        trip = config_.policy.issues_nrr() && c >= config_.policy.t_mac;
    }
    if (!trip) return {};

    if (config_.reset_on_nrr) {
        if (config_.kind == TrackerKind::FrequentItem)
            std::erase_if(table_, [key](const MgEntry& e) { return e.key == key; });
        else
            counters_[key] = 0;
    }
    flag_ = true;
    NrrEvent ev{tick, row, refresh_set(row)};
    log_.push_back(ev);
    return {std::move(ev)};
}

void DefenseState::window_rollover(std::uint64_t tick)
{
    if (tick < window_start_)
        throw std::invalid_argument("window_rollover: tick precedes the window start");
    for (auto k : touched_) counters_[k] = 0;
    touched_.clear();
    table_.clear();
    flag_ = false;
    window_start_ = tick;
}

std::uint64_t DefenseState::count(RowId row) const
{
    if (row.bank >= geometry_.banks_per_chip || row.row >= geometry_.rows_per_bank) return 0;
    const std::size_t key = slot(row);
    if (config_.kind != TrackerKind::FrequentItem) return counters_[key];
    for (const auto& e : table_)
        if (e.key == key) return e.count;
    return 0;
}

void write_nrr_log_csv(std::ostream& out, const std::vector<NrrEvent>& log)
{
    out << "tick,aggressor_row,refreshed_rows\n";
    for (const auto& ev : log) {
        out << ev.tick << ',' << ev.aggressor.row << ',';
        for (std::size_t i = 0; i < ev.refreshed.size(); ++i)
            out << (i ? ";" : "") << ev.refreshed[i].row;
        out << '\n';
    }
}

} // namespace hammersim
