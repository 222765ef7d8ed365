#include "hammersim/error.hpp"
#include "hammersim/trace_engine.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

using namespace hammersim;

namespace {

AttackConfig attack(std::uint64_t S, std::uint64_t T, Interleaving mode = Interleaving::RoundRobin)
{
    AttackConfig a;
    a.geometry.row_size_bits = 64;
    a.target = {0, 100};
    a.S = S;
    a.T = T;
    a.model = AttackConfig::model_for(S, T);
    a.interleaving = mode;
    a.apply_default_patterns();
    return a;
}

std::vector<std::uint32_t> act_rows(const CommandTrace& t)
{
    std::vector<std::uint32_t> rows;
    for (const auto& c : t.commands)
        if (c.kind == CommandKind::ACT) rows.push_back(c.address.row);
    return rows;
}

} // namespace

TEST_CASE("compile: sequential double-sided")
{
    const auto t = compile_counter_bypass(attack(0, 3, Interleaving::Sequential), {});
    CHECK(act_rows(t) == std::vector<std::uint32_t>{99, 101, 99, 101, 99, 101});
    // Readback after the hammers: one RD per tracked row.
    std::vector<std::uint32_t> reads;
    for (const auto& c : t.commands)
        if (c.kind == CommandKind::RD) reads.push_back(c.address.row);
    CHECK(reads == std::vector<std::uint32_t>{98, 99, 100, 101, 102});
    CHECK(t.commands.back().kind == CommandKind::RD);
    CHECK(validate_trace(t).empty());
}

TEST_CASE("compile: empty schedule has only readbacks")
{
    const auto t = compile_counter_bypass(attack(0, 0), {});
    CHECK(t.commands.size() == 5);
    for (const auto& c : t.commands) CHECK(c.kind == CommandKind::RD);
}

TEST_CASE("compile: round robin order")
{
    const auto t = compile_counter_bypass(attack(2, 2), {});
    CHECK(act_rows(t) == std::vector<std::uint32_t>{99, 101, 98, 102, 99, 101, 98, 102});
    const auto u = compile_counter_bypass(attack(3, 1), {});
    CHECK(act_rows(u) == std::vector<std::uint32_t>{99, 101, 98, 102, 98, 102, 98, 102});
}

TEST_CASE("compile: each iteration is ACT, PRE after tRAS, next ACT after tRP")
{
    TimingParams tp;
    const auto t = compile_counter_bypass(attack(1, 1), tp);
    REQUIRE(t.commands.size() >= 4);
    CHECK(t.commands[0].tick == 0);
    CHECK(t.commands[1].kind == CommandKind::PRE);
    CHECK(t.commands[1].tick == tp.tras_ck);
    CHECK(t.commands[2].tick == tp.tras_ck + tp.trp_ck);
}

TEST_CASE("compile: ACT counts and interleaving multisets on random configs")
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const std::uint64_t S = rng() % 40, T = rng() % 40;
        const auto rr = compile_counter_bypass(attack(S, T), {});
        const auto sq = compile_counter_bypass(attack(S, T, Interleaving::Sequential), {});
        auto a = act_rows(rr), b = act_rows(sq);
        CHECK(a.size() == 2 * (S + T));
        std::map<std::uint32_t, std::uint64_t> per_row;
        for (auto r : a) per_row[r]++;
        CHECK(per_row[99] == T);
        CHECK(per_row[101] == T);
        CHECK(per_row[98] == S);
        CHECK(per_row[102] == S);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
        CHECK(validate_trace(rr).empty());
        CHECK(validate_trace(sq).empty());
    }
}

TEST_CASE("validate_trace flags hand-built violations")
{
    CommandTrace t;
    t.commands = {{CommandKind::ACT, {0, 5}, std::nullopt, 0}, {CommandKind::PRE, {0, 5}, std::nullopt, 10}};
    auto v = validate_trace(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == TimingViolation::Kind::tRAS);
    CHECK(v[0].index == 1);

    t.commands = {{CommandKind::ACT, {0, 5}, std::nullopt, 0},
                  {CommandKind::PRE, {0, 5}, std::nullopt, 39},
                  {CommandKind::ACT, {0, 6}, std::nullopt, 45}};
    v = validate_trace(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == TimingViolation::Kind::tRP);

    t.commands = {{CommandKind::ACT, {0, 5}, std::nullopt, 10}, {CommandKind::PRE, {0, 5}, std::nullopt, 10}};
    v = validate_trace(t);
    CHECK(std::any_of(v.begin(), v.end(), [](auto& x) { return x.kind == TimingViolation::Kind::Ordering; }));

    t.commands = {{CommandKind::PRE, {0, 5}, std::nullopt, 0}};
    v = validate_trace(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == TimingViolation::Kind::NoOpenRow);

    t.commands = {{CommandKind::ACT, {0, 5}, std::nullopt, 0}, {CommandKind::ACT, {0, 6}, std::nullopt, 60}};
    v = validate_trace(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == TimingViolation::Kind::RowConflict);

    // Other banks keep their own state.
    t.commands = {{CommandKind::ACT, {0, 5}, std::nullopt, 0}, {CommandKind::ACT, {1, 6}, std::nullopt, 1}};
    CHECK(validate_trace(t).empty());
}

TEST_CASE("hammer_budget matches the closed form")
{
    TimingParams tp;
    tp.refresh_enabled = true;
    // tCK = 0.833 ns = 833 ps; tREFW = 64 ms.
    CHECK(hammer_budget(tp) == oracle::budget_ps(64'000'000'000ull, 51, 833));

    tp.refresh_enabled = false;
    CHECK(hammer_budget(tp) == kUnboundedBudget);

    std::mt19937_64 rng(11);
    for (int i = 0; i < 10; ++i) {
        TimingParams t;
        t.refresh_enabled = true;
        const std::uint64_t tck_ps = 500 + rng() % 1000;
        t.tck_ns = static_cast<double>(tck_ps) / 1000.0;
        t.tras_ck = 36 + rng() % 13;
        t.trp_ck = 10 + rng() % 10;
        t.trefw_ms = static_cast<double>(32 + rng() % 64);
        const auto expect =
            oracle::budget_ps(static_cast<std::uint64_t>(t.trefw_ms) * 1'000'000'000ull, t.tras_ck + t.trp_ck, tck_ps);
        const auto got = hammer_budget(t);
        CHECK(got == expect);

        TimingParams doubled = t;
        doubled.tras_ck *= 2;
        doubled.trp_ck *= 2;
        const auto half = hammer_budget(doubled);
        CHECK(half <= got / 2 + 1);
        CHECK(half + 1 >= got / 2);
    }
}

TEST_CASE("budget errors and refresh-window violations")
{
    TimingParams tp;
    tp.refresh_enabled = true;
    const auto budget = hammer_budget(tp);
    // Two ACT/PRE pairs per iteration count, plus five readback cycles.
    const std::uint64_t fits = (budget - 5) / 2;
    CHECK_NOTHROW(check_budget(attack(0, fits), tp));
    CHECK_THROWS_AS(check_budget(attack(0, fits + 1), tp), BudgetError);
    CHECK_THROWS_AS(compile_counter_bypass(attack(0, 2'000'000), tp), BudgetError);

    // 2M pairs compiled without refresh, then checked against a refresh-on window.
    auto trace = compile_counter_bypass(attack(0, 1'000'000), TimingParams{});
    trace.timing.refresh_enabled = true;
    const auto span_cycles = (trace_span_ticks(trace) + 50) / 51;
    auto v = validate_trace(trace);
    CHECK((span_cycles > budget) == !v.empty());
    CHECK(std::any_of(v.begin(), v.end(), [](auto& x) { return x.kind == TimingViolation::Kind::RefreshWindow; }));

    auto small = compile_counter_bypass(attack(0, 700'000), TimingParams{});
    small.timing.refresh_enabled = true;
    CHECK(validate_trace(small).empty());
}

TEST_CASE("timing validation")
{
    TimingParams t;
    CHECK_NOTHROW(t.validate());
    t.sleep_ck = 0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t = {};
    t.sleep_ck = t.tras_ck + 1;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t = {};
    t.tck_ns = 0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("attack config invariants")
{
    auto a = attack(5, 5);
    a.model = AttackModel::DoubleSided;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    a = attack(5, 5);
    a.model = AttackModel::ARVRA;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    a = attack(0, 5);
    a.target.row = 1;
    CHECK_THROWS_AS(a.validate(), LayoutError);
    CHECK(AttackConfig::model_for(0, 3) == AttackModel::DoubleSided);
    CHECK(AttackConfig::model_for(3, 0) == AttackModel::ARVRA);
    CHECK(AttackConfig::model_for(3, 3) == AttackModel::AAVAA);
    CHECK(parse_attack_model("DS") == AttackModel::DoubleSided);
    CHECK_THROWS_AS(parse_attack_model("quad"), ConfigError);
}

TEST_CASE("trace text round trip")
{
    const auto t = compile_counter_bypass(attack(2, 3), {});
    std::ostringstream out;
    write_trace(out, t);
    CHECK(out.str().rfind("0 ACT 0 99\n39 PRE 0 99\n", 0) == 0);
    std::istringstream in(out.str());
    CHECK(read_trace(in) == t.commands);

    std::istringstream bad("12 ACT zero 4\n");
    CHECK_THROWS_AS(read_trace(bad), ConfigError);
    std::istringstream kind("12 HAMMER 0 4\n");
    CHECK_THROWS_AS(read_trace(kind), ConfigError);
}

TEST_CASE("for_each_hammer can stop early")
{
    int seen = 0;
    for_each_hammer(attack(10, 10), [&](RowId) { return ++seen < 7; });
    CHECK(seen == 7);
}
