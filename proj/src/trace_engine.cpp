#include "hammersim/trace_engine.hpp"

#include "hammersim/error.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace hammersim {

// ---------------------------------------------------------------------------
// AttackConfig

void AttackConfig::apply_default_patterns()
{
    if (aggressor_pattern.size() == 0) aggressor_pattern = RowData(geometry.row_size_bits, true);
    if (victim_pattern.size() == 0) victim_pattern = RowData(geometry.row_size_bits, false);
}

void AttackConfig::validate() const
{
    geometry.validate();
    if (model == AttackModel::DoubleSided && S != 0)
        throw ConfigError("attack: DoubleSided requires S = 0");
    if (model == AttackModel::ARVRA && T != 0) throw ConfigError("attack: ARVRA requires T = 0");
    if (target.bank >= geometry.banks_per_chip) throw LayoutError("attack: bank out of range");
    if (target.row < 2 || static_cast<std::uint64_t>(target.row) + 2 >= geometry.rows_per_bank)
        throw LayoutError("attack: target row " + std::to_string(target.row) +
                          " leaves no room for X+-2");
    if (aggressor_pattern.size() != 0 && aggressor_pattern.size() != geometry.row_size_bits)
        throw ConfigError("attack: aggressor pattern length differs from row_size_bits");
    if (victim_pattern.size() != 0 && victim_pattern.size() != geometry.row_size_bits)
        throw ConfigError("attack: victim pattern length differs from row_size_bits");
}

AttackModel AttackConfig::model_for(std::uint64_t S, std::uint64_t T)
{
    if (S == 0) return AttackModel::DoubleSided;
    if (T == 0) return AttackModel::ARVRA;
    return AttackModel::AAVAA;
}

std::string_view to_string(AttackModel model)
{
    switch (model) {
    case AttackModel::DoubleSided: return "DoubleSided";
    case AttackModel::ARVRA: return "ARVRA";
    case AttackModel::AAVAA: return "AAVAA";
    }
    return "?";
}

AttackModel parse_attack_model(std::string_view text)
{
    if (text == "DoubleSided" || text == "double_sided" || text == "double-sided" || text == "DS")
        return AttackModel::DoubleSided;
    if (text == "ARVRA" || text == "arvra") return AttackModel::ARVRA;
    if (text == "AAVAA" || text == "aavaa") return AttackModel::AAVAA;
    throw ConfigError("unknown attack model '" + std::string(text) + "'");
}

std::string_view to_string(Interleaving mode)
{
    return mode == Interleaving::Sequential ? "sequential" : "round_robin";
}

Interleaving parse_interleaving(std::string_view text)
{
    if (text == "sequential") return Interleaving::Sequential;
    if (text == "round_robin" || text == "round-robin") return Interleaving::RoundRobin;
    throw ConfigError("unknown interleaving '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Timing

void TimingParams::validate() const
{
    if (!(tck_ns > 0)) throw ConfigError("timing: tCK must be > 0");
    if (tras_ck == 0) throw ConfigError("timing: tRAS must be > 0");
    if (trp_ck == 0) throw ConfigError("timing: tRP must be > 0");
    if (sleep_ck == 0 || sleep_ck > tras_ck)
        throw ConfigError("timing: sleep must be in [1, tRAS]");
    if (!(trefw_ms > 0)) throw ConfigError("timing: tREFW must be > 0");
}

std::string_view to_string(CommandKind kind)
{
    switch (kind) {
    case CommandKind::ACT: return "ACT";
    case CommandKind::PRE: return "PRE";
    case CommandKind::RD: return "RD";
    case CommandKind::WR: return "WR";
    case CommandKind::REF: return "REF";
    case CommandKind::NRR: return "NRR";
    }
    return "?";
}

CommandKind parse_command_kind(std::string_view text)
{
    for (auto k : {CommandKind::ACT, CommandKind::PRE, CommandKind::RD, CommandKind::WR,
                   CommandKind::REF, CommandKind::NRR})
        if (to_string(k) == text) return k;
    throw ConfigError("unknown command kind '" + std::string(text) + "'");
}

std::uint64_t hammer_budget(const TimingParams& timing)
{
    if (!timing.refresh_enabled || std::isinf(timing.trefw_ms)) return kUnboundedBudget;
    const double per_iteration_ns = static_cast<double>(timing.row_cycle_ck()) * timing.tck_ns;
    // An exact integer quotient can land a hair below itself in floating point.
    const double q = timing.trefw_ns() / per_iteration_ns;
    return static_cast<std::uint64_t>(std::floor(q * (1 + 1e-12)));
}

std::vector<RowId> readback_rows(const AttackConfig& config)
{
    std::vector<RowId> rows;
    for (int d = -2; d <= 2; ++d)
        rows.push_back({config.target.bank,
                        static_cast<std::uint32_t>(static_cast<int>(config.target.row) + d)});
    return rows;
}

std::uint64_t schedule_cycles(const AttackConfig& config)
{
    return 2 * (config.S + config.T) + readback_rows(config).size();
}

void check_budget(const AttackConfig& config, const TimingParams& timing)
{
    const auto budget = hammer_budget(timing);
    if (budget == kUnboundedBudget) return;
    const auto needed = schedule_cycles(config);
    if (needed > budget)
        throw BudgetError("schedule needs " + std::to_string(needed) +
                          " row cycles but only " + std::to_string(budget) +
                          " fit in tREFW with refresh enabled");
}

CommandTrace compile_counter_bypass(const AttackConfig& config, const TimingParams& timing)
{
    config.validate();
    timing.validate();
    check_budget(config, timing);

    CommandTrace trace;
    trace.timing = timing;
    trace.interleaving = config.interleaving;
    trace.commands.reserve(static_cast<std::size_t>(4 * (config.S + config.T) + 5));

    const std::uint64_t cycle = timing.row_cycle_ck();
    std::uint64_t tick = 0;
    for_each_hammer(config, [&](RowId row) {
        trace.commands.push_back({CommandKind::ACT, row, std::nullopt, tick});
        trace.commands.push_back({CommandKind::PRE, row, std::nullopt, tick + timing.tras_ck});
        tick += cycle;
    });
    for (auto row : readback_rows(config)) {
        trace.commands.push_back({CommandKind::RD, row, 0u, tick});
        tick += cycle;
    }
    return trace;
}

std::string_view to_string(TimingViolation::Kind kind)
{
    switch (kind) {
    case TimingViolation::Kind::tRAS: return "tRAS";
    case TimingViolation::Kind::tRP: return "tRP";
    case TimingViolation::Kind::Ordering: return "ordering";
    case TimingViolation::Kind::RowConflict: return "row_conflict";
    case TimingViolation::Kind::NoOpenRow: return "no_open_row";
    case TimingViolation::Kind::RefreshWindow: return "tREFW";
    }
    return "?";
}

std::uint64_t trace_span_ticks(const CommandTrace& trace)
{
    if (trace.commands.empty()) return 0;
    std::uint64_t first = trace.commands.front().tick;
    std::uint64_t end = 0;
    for (const auto& c : trace.commands) {
        first = std::min(first, c.tick);
        std::uint64_t occupancy = 1;
        if (c.kind == CommandKind::PRE) occupancy = trace.timing.trp_ck;
        if (c.kind == CommandKind::RD || c.kind == CommandKind::WR)
            occupancy = trace.timing.row_cycle_ck();
        end = std::max(end, c.tick + occupancy);
    }
    return end - first;
}

std::vector<TimingViolation> validate_trace(const CommandTrace& trace)
{
    using Kind = TimingViolation::Kind;
    std::vector<TimingViolation> out;

    struct BankState {
        std::optional<std::uint64_t> last_tick;
        std::optional<std::uint64_t> open_since; // tick of ACT of the open row
        std::optional<std::uint32_t> open_row;
        std::optional<std::uint64_t> last_pre;
    };
    std::map<std::uint32_t, BankState> banks;

    const auto& t = trace.timing;
    for (std::size_t i = 0; i < trace.commands.size(); ++i) {
        const Command& c = trace.commands[i];
        BankState& b = banks[c.address.bank];
        if (b.last_tick && c.tick <= *b.last_tick)
            out.push_back({Kind::Ordering, i,
                           "tick " + std::to_string(c.tick) + " does not advance past " +
                               std::to_string(*b.last_tick)});
        b.last_tick = c.tick;

        switch (c.kind) {
        case CommandKind::ACT:
            if (b.open_row) {
                out.push_back({Kind::RowConflict, i,
                               "ACT while row " + std::to_string(*b.open_row) + " is open"});
            }
            if (b.last_pre && c.tick - *b.last_pre < t.trp_ck)
                out.push_back({Kind::tRP, i,
                               "PRE->ACT gap " + std::to_string(c.tick - *b.last_pre) + " < tRP " +
                                   std::to_string(t.trp_ck)});
            b.open_row = c.address.row;
            b.open_since = c.tick;
            break;
        case CommandKind::PRE:
            if (!b.open_since) {
                out.push_back({Kind::NoOpenRow, i, "PRE with no open row"});
            } else if (c.tick - *b.open_since < t.tras_ck) {
                out.push_back({Kind::tRAS, i,
                               "ACT->PRE gap " + std::to_string(c.tick - *b.open_since) +
                                   " < tRAS " + std::to_string(t.tras_ck)});
            }
            b.open_row.reset();
            b.open_since.reset();
            b.last_pre = c.tick;
            break;
        default:
            break;
        }
    }

    if (t.refresh_enabled && !trace.commands.empty()) {
        const double span_ns = static_cast<double>(trace_span_ticks(trace)) * t.tck_ns;
        const auto budget = hammer_budget(t);
        const std::uint64_t cycles = (trace_span_ticks(trace) + t.row_cycle_ck() - 1) / t.row_cycle_ck();
        if (cycles > budget)
            out.push_back({Kind::RefreshWindow, trace.commands.size() - 1,
                           "trace spans " + std::to_string(span_ns * 1e-6) + " ms > tREFW " +
                               std::to_string(t.trefw_ms) + " ms"});
    }
    return out;
}

void write_trace(std::ostream& out, const CommandTrace& trace)
{
    for (const auto& c : trace.commands) {
        out << c.tick << ' ' << to_string(c.kind) << ' ' << c.address.bank << ' ' << c.address.row;
        if (c.column) out << ' ' << *c.column;
        out << '\n';
    }
}

std::vector<Command> read_trace(std::istream& in)
{
    std::vector<Command> cmds;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Command c;
        std::string kind;
        if (!(ls >> c.tick >> kind >> c.address.bank >> c.address.row))
            throw ConfigError("trace line " + std::to_string(lineno) + ": expected TICK KIND BANK ROW [COL]");
        c.kind = parse_command_kind(kind);
        std::uint32_t col = 0;
        if (ls >> col) c.column = col;
        cmds.push_back(c);
    }
    return cmds;
}

} // namespace hammersim
