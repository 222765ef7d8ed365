#include "hammersim/engine.hpp"
#include "hammersim/error.hpp"
#include "hammersim/feasibility.hpp"
#include "hammersim/presets.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace hammersim;

namespace {

DefenseConfig limit(TrackerKind kind, std::uint64_t t_mac)
{
    DefenseConfig d;
    d.kind = kind;
    d.policy = MacPolicy::limit(t_mac);
    return d;
}

AttackConfig layout(std::uint32_t row, std::uint64_t S, std::uint64_t T)
{
    AttackConfig a;
    a.geometry.rows_per_bank = 1024;
    a.geometry.row_size_bits = 64;
    a.target = {0, row};
    a.S = S;
    a.T = T;
    a.model = AttackConfig::model_for(S, T);
    a.apply_default_patterns();
    return a;
}

} // namespace

TEST_CASE("verdicts follow the reach of bypassing attacks")
{
    const auto p = preset_profile("mf-H");
    const auto d = limit(TrackerKind::PerRowCounter, 2'000'000);
    FeasibilityOptions o;
    std::vector<TargetCell> cells;
    for (std::uint32_t k = 0; k < p.cells_per_row; k += 3)
        cells.push_back({{0, 100}, weak_cell_bit(k, p.cells_per_row, o.geometry.row_size_bits), false, true});
    const auto verdicts = feasibility(p, d, cells, o);
    REQUIRE(verdicts.size() == cells.size());

    const auto reach = reach_limits(p, d, {0, 100}, o);
    CHECK(reach.bypass_S < 2'000'000);
    CHECK(reach.bypass_T < 2'000'000);
    CHECK(reach.bypass_intensity <= reach.open_intensity);
    CHECK(reach.bypass_intensity == doctest::Approx(effective_disturbance(p, reach.bypass_S, reach.bypass_T)));
    CHECK(reach.open_S == 10'000'000);
    CHECK(reach.open_T == 10'000'000);

    const auto thresholds = cell_resistances(p, row_seed(o.seed, {0, 100}));
    int seen[3] = {0, 0, 0};
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const auto& v = verdicts[i];
        const auto k = i * 3;
        CHECK(v.threshold == thresholds[k]);
        if (v.threshold <= reach.bypass_intensity)
            CHECK(v.status == CellStatus::Flippable);
        else if (v.threshold <= reach.open_intensity)
            CHECK(v.status == CellStatus::Blocked);
        else
            CHECK(v.status == CellStatus::Infeasible);
        seen[static_cast<int>(v.status)]++;
    }
    CHECK(seen[0] > 0);
    CHECK(seen[1] > 0);
    CHECK(seen[2] > 0);
}

TEST_CASE("trivially infeasible cells")
{
    const auto p = preset_profile("mf-H");
    const auto d = limit(TrackerKind::PerRowCounter, 2'000'000);
    FeasibilityOptions o;
    const std::vector<TargetCell> cells{
        {{0, 100}, 0, true, true}, // nothing to change
        {{0, 1}, 0, false, true},  // no room for X-2
        {{0, 100}, 1, false, true}, // no weak cell at bit 1
    };
    const auto v = feasibility(p, d, cells, o);
    for (const auto& x : v) CHECK(x.status == CellStatus::Infeasible);
    CHECK(std::isinf(v[0].threshold));
    CHECK(v[1].reason.find("edge") != std::string::npos);
    CHECK(v[2].reason.find("weak cell") != std::string::npos);

    CHECK_THROWS_AS(feasibility(p, d, {{{0, 100}, 70000, false, true}}, o), ConfigError);
    CHECK_THROWS_AS(feasibility(p, d, {{{3, 100}, 0, false, true}}, o), ConfigError);
    CHECK_THROWS_AS(reach_limits(p, d, {0, 0}, o), LayoutError);
}

TEST_CASE("bypass points are undetected and maximal under replay")
{
    const auto p = preset_profile("mf-C");
    FeasibilityOptions o;
    o.geometry.rows_per_bank = 1024;
    o.geometry.row_size_bits = 8192;
    o.max_hc = 400;
    std::mt19937 rng(4);
    for (auto kind : {TrackerKind::PerRowCounter, TrackerKind::GroupCounter, TrackerKind::FrequentItem}) {
        for (int trial = 0; trial < 12; ++trial) {
            auto d = limit(kind, 20 + rng() % 200);
            d.group_size = 1 + rng() % 8;
            const std::uint32_t row = 10 + rng() % 100;
            CAPTURE(to_string(kind));
            CAPTURE(d.policy.t_mac);
            CAPTURE(d.group_size);
            CAPTURE(row);
            const auto r = reach_limits(p, d, {0, row}, o);
            CHECK_FALSE(attack_detected(layout(row, r.bypass_S, r.bypass_T), d, {}));
            if (r.bypass_T < 400)
                CHECK(attack_detected(layout(row, r.bypass_S, r.bypass_T + 1), d, {}));
        }
    }
}

TEST_CASE("attack model restricts the reach")
{
    const auto p = preset_profile("mf-H");
    const auto d = limit(TrackerKind::PerRowCounter, 2'000'000);
    FeasibilityOptions o;
    o.model = AttackModel::DoubleSided;
    const auto ds = reach_limits(p, d, {0, 100}, o);
    CHECK(ds.bypass_S == 0);
    CHECK(ds.bypass_T == 1'999'999);
    o.model = AttackModel::ARVRA;
    const auto arvra = reach_limits(p, d, {0, 100}, o);
    CHECK(arvra.bypass_T == 0);
    o.model = AttackModel::AAVAA;
    CHECK(reach_limits(p, d, {0, 100}, o).bypass_intensity > ds.bypass_intensity);

    // The refresh window caps S + T.
    o.timing.refresh_enabled = true;
    const auto capped = reach_limits(p, d, {0, 100}, o);
    CHECK(2 * (capped.open_S + capped.open_T) + 5 <= hammer_budget(o.timing));
}

TEST_CASE("physical map moves the layout")
{
    const auto p = preset_profile("mf-H");
    const auto d = limit(TrackerKind::PerRowCounter, 2'000'000);
    FeasibilityOptions plain;
    FeasibilityOptions mapped;
    const std::vector<std::pair<std::uint32_t, std::uint32_t>> swap{{5, 100}, {100, 5}};
    mapped.map = PhysicalMap::from_pairs(plain.geometry.rows_per_bank, swap);
    const auto a = feasibility(p, d, {{{0, 100}, 0, false, true}}, plain);
    const auto b = feasibility(p, d, {{{0, 5}, 0, false, true}}, mapped);
    CHECK(a[0].threshold == b[0].threshold);
    CHECK(a[0].status == b[0].status);
    // Logical 100 now sits at physical 5, which is fine too.
    const auto c = feasibility(p, d, {{{0, 100}, 0, false, true}}, mapped);
    CHECK(c[0].threshold != a[0].threshold);
}

TEST_CASE("cells CSV parsing and verdict output")
{
    const auto cells = parse_target_cells("bank,row,cell,from,to\n# comment\n0,100,0,0,1\n0,200,30,1,0\n");
    REQUIRE(cells.size() == 2);
    CHECK(cells[1].row == RowId{0, 200});
    CHECK(cells[1].bit == 30);
    CHECK(cells[1].from);
    CHECK_FALSE(cells[1].to);
    CHECK_THROWS_AS(parse_target_cells("0,100,0,0\n"), ConfigError);
    CHECK_THROWS_AS(parse_target_cells("0,100,0,0,2\n"), ConfigError);
    CHECK_THROWS_AS(parse_target_cells("0,x,0,0,1\n"), ConfigError);

    std::ostringstream out;
    write_verdicts_csv(out, {{cells[0], CellStatus::Blocked, 2.5e6, "why"},
                             {cells[1], CellStatus::Infeasible, INFINITY, "none"}});
    CHECK(out.str() == "bank,row,cell,from,to,status,threshold,reason\n"
                       "0,100,0,0,1,blocked,2.5e+06,why\n"
                       "0,200,30,1,0,infeasible,inf,none\n");
}
