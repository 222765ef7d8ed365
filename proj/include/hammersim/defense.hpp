#pragma once

#include "hammersim/dram_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hammersim {

/// How a module reacts to a row reaching its activation limit. Unlimited and
/// Untested modules count activations but never refresh neighbours.
struct MacPolicy {
    enum class Kind { Unlimited, Untested, Limit };

    Kind kind = Kind::Unlimited;
    std::uint64_t t_mac = 0; // meaningful only for Limit

    static MacPolicy unlimited() { return {Kind::Unlimited, 0}; }
    static MacPolicy untested() { return {Kind::Untested, 0}; }
    static MacPolicy limit(std::uint64_t t_mac) { return {Kind::Limit, t_mac}; }

    bool issues_nrr() const noexcept { return kind == Kind::Limit; }
    void validate() const;
};

std::string to_string(const MacPolicy& policy);
/// "unlimited", "untested" or a positive count.
MacPolicy parse_mac_policy(std::string_view text);

enum class TrackerKind { PerRowCounter, GroupCounter, FrequentItem };

std::string_view to_string(TrackerKind kind);
TrackerKind parse_tracker_kind(std::string_view text);

struct DefenseConfig {
    TrackerKind kind = TrackerKind::PerRowCounter;
    MacPolicy policy;
    std::uint32_t group_size = 8;    // GroupCounter: aligned groups of consecutive rows
    std::uint32_t num_counters = 16; // FrequentItem: Misra-Gries table size
    bool reset_on_nrr = true;
    std::string name; // report label; defaults to label()

    void validate() const;
    /// name if set, else e.g. "PerRowCounter@2000000".
    std::string label() const;
};

struct NrrEvent {
    std::uint64_t tick = 0;
    RowId aggressor;
    std::vector<RowId> refreshed;

    bool operator==(const NrrEvent&) const = default;
};

/// Counter-based tracker observing one chip's ACT stream. Row addresses are
/// physical positions.
class DefenseState {
public:
    DefenseState(const DefenseConfig& config, const DramGeometry& geometry,
                 std::uint64_t window_start = 0);

    /// Counts the activation and returns the NRRs it triggers (at most one).
    /// Throws std::invalid_argument if tick precedes the window start or the
    /// row is outside the geometry.
    std::vector<NrrEvent> observe_activate(RowId row, std::uint64_t tick);

    /// Starts a new refresh window at `tick`: clears every counter and the
    /// detection flag. The NRR log is kept.
    void window_rollover(std::uint64_t tick);

    /// No NRR issued so far.
    bool is_bypassed() const noexcept { return log_.empty(); }
    bool detected() const noexcept { return !log_.empty(); }
    /// Flag F: an NRR fired in the current window.
    bool flag() const noexcept { return flag_; }

    /// Tracked count behind `row`: its own counter, its group's counter, or
    /// its Misra-Gries estimate (0 when not in the table).
    std::uint64_t count(RowId row) const;

    const std::vector<NrrEvent>& nrr_log() const noexcept { return log_; }
    std::uint64_t window_start() const noexcept { return window_start_; }
    const DefenseConfig& config() const noexcept { return config_; }

private:
    std::size_t slot(RowId row) const;
    std::vector<RowId> refresh_set(RowId row) const;
    bool misra_gries_observe(std::size_t key);

    DefenseConfig config_;
    DramGeometry geometry_;
    std::uint64_t window_start_;
    bool flag_ = false;
    std::vector<NrrEvent> log_;

    // PerRowCounter / GroupCounter: dense counters plus the touched slots so
    // rollover does not sweep the whole array.
    std::vector<std::uint64_t> counters_;
    std::vector<std::size_t> touched_;

    // FrequentItem
    struct MgEntry {
        std::size_t key;
        std::uint64_t count;
    };
    std::vector<MgEntry> table_;
};

/// CSV with header tick,aggressor_row,refreshed_rows; refreshed rows are
/// ';'-separated row indices.
void write_nrr_log_csv(std::ostream& out, const std::vector<NrrEvent>& log);

} // namespace hammersim
