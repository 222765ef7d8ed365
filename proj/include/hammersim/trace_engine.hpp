#pragma once

#include "hammersim/attack.hpp"
#include "hammersim/dram_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace hammersim {

/// DDR4 timing. Durations in ns/ms, command spacings in clock cycles.
struct TimingParams {
    double tck_ns = 0.833; // DDR4-2400
    std::uint32_t tras_ck = 39;
    std::uint32_t trp_ck = 12;
    std::uint32_t sleep_ck = 5;
    double trefw_ms = 64.0;
    bool refresh_enabled = false;

    void validate() const;

    /// Ticks spent on one ACT..PRE..(next ACT) hammer iteration.
    std::uint64_t row_cycle_ck() const noexcept { return std::uint64_t{tras_ck} + trp_ck; }
    double trefw_ns() const noexcept { return trefw_ms * 1e6; }
};

enum class CommandKind { ACT, PRE, RD, WR, REF, NRR };

std::string_view to_string(CommandKind kind);
CommandKind parse_command_kind(std::string_view text);

struct Command {
    CommandKind kind = CommandKind::ACT;
    RowId address;
    std::optional<std::uint32_t> column; // RD/WR only
    std::uint64_t tick = 0;

    bool operator==(const Command&) const = default;
};

struct CommandTrace {
    TimingParams timing;
    std::vector<Command> commands;
    Interleaving interleaving = Interleaving::RoundRobin;
};

inline constexpr std::uint64_t kUnboundedBudget = std::numeric_limits<std::uint64_t>::max();

/// Complete hammer iterations (ACT+PRE pairs) that fit one refresh window:
/// floor(tREFW / ((tRAS + tRP) * tCK)). kUnboundedBudget when refresh is off.
std::uint64_t hammer_budget(const TimingParams& timing);

/// Rows read back after hammering: X-2 .. X+2.
std::vector<RowId> readback_rows(const AttackConfig& config);

/// Visits the aggressor of every hammer iteration in issue order without
/// materialising the trace. Iteration i starts (ACT) at tick i * row_cycle.
/// A visitor returning bool stops the walk by returning false.
template <typename Visitor>
void for_each_hammer(const AttackConfig& config, Visitor&& visit)
{
    const RowId x = config.target;
    const RowId near_lo{x.bank, x.row - 1}, near_hi{x.bank, x.row + 1};
    const RowId edge_lo{x.bank, x.row - 2}, edge_hi{x.bank, x.row + 2};
    auto emit = [&](RowId row) {
        if constexpr (std::is_same_v<std::invoke_result_t<Visitor&, RowId>, bool>)
            return visit(row);
        else
            return visit(row), true;
    };
    if (config.interleaving == Interleaving::Sequential) {
        for (std::uint64_t i = 0; i < config.T; ++i)
            if (!emit(near_lo) || !emit(near_hi)) return;
        for (std::uint64_t i = 0; i < config.S; ++i)
            if (!emit(edge_lo) || !emit(edge_hi)) return;
        return;
    }
    const std::uint64_t rounds = config.S > config.T ? config.S : config.T;
    for (std::uint64_t i = 0; i < rounds; ++i) {
        if (i < config.T && (!emit(near_lo) || !emit(near_hi))) return;
        if (i < config.S && (!emit(edge_lo) || !emit(edge_hi))) return;
    }
}

/// Hammer iterations plus readback cycles of a compiled trace.
std::uint64_t schedule_cycles(const AttackConfig& config);

/// Throws BudgetError when refresh is enabled and the schedule does not fit
/// in one tREFW window.
void check_budget(const AttackConfig& config, const TimingParams& timing);

/// Compiles the attack into ACT/PRE pairs followed by one RD per tracked row.
CommandTrace compile_counter_bypass(const AttackConfig& config, const TimingParams& timing);

struct TimingViolation {
    enum class Kind { tRAS, tRP, Ordering, RowConflict, NoOpenRow, RefreshWindow };
    Kind kind;
    std::size_t index; // offending command
    std::string detail;
};

std::string_view to_string(TimingViolation::Kind kind);

/// Empty iff every ACT->PRE gap >= tRAS, every PRE->ACT gap (same bank) >=
/// tRP, same-bank ticks strictly increase, and, with refresh enabled, the
/// trace span fits tREFW.
std::vector<TimingViolation> validate_trace(const CommandTrace& trace);

/// Span in ticks: from the first command to the end of the last one
/// (PRE occupies tRP, RD/WR a full row cycle, others one tick).
std::uint64_t trace_span_ticks(const CommandTrace& trace);

/// "TICK KIND BANK ROW [COL]" per line.
void write_trace(std::ostream& out, const CommandTrace& trace);
std::vector<Command> read_trace(std::istream& in);

} // namespace hammersim
