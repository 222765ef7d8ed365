#include "hammersim/engine.hpp"
#include "hammersim/error.hpp"
#include "hammersim/presets.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace hammersim;

namespace {

AttackConfig attack(std::uint64_t S, std::uint64_t T)
{
    AttackConfig a;
    a.target = {0, 100};
    a.S = S;
    a.T = T;
    a.model = AttackConfig::model_for(S, T);
    a.apply_default_patterns();
    return a;
}

/// Small, easily disturbed chip: thresholds around a few thousand hammers.
ChipProfile toy_profile()
{
    ChipProfile p;
    p.vendor_id = "toy";
    p.alpha = 0.3;
    p.gamma = 0.6;
    p.mu = std::log(2000.0);
    p.sigma = 0.5;
    p.cells_per_row = 256;
    p.finalize();
    return p;
}

AttackConfig toy_attack(std::uint64_t S, std::uint64_t T)
{
    auto a = attack(S, T);
    a.geometry.rows_per_bank = 512;
    a.geometry.row_size_bits = 1024;
    a.aggressor_pattern = RowData(1024, true);
    a.victim_pattern = RowData(1024, false);
    return a;
}

DefenseConfig per_row(std::uint64_t t_mac)
{
    DefenseConfig d;
    d.policy = MacPolicy::limit(t_mac);
    return d;
}

} // namespace

TEST_CASE("weak cell placement")
{
    CHECK(weak_cell_bit(0, 6144, 65536) == 0);
    CHECK(weak_cell_bit(1, 6144, 65536) == 10);
    CHECK(weak_cell_bit(6143, 6144, 65536) == 65525);
    for (std::uint32_t k = 0; k < 6144; k += 97) CHECK(weak_cell_at(weak_cell_bit(k, 6144, 65536), 6144, 65536) == k);
    CHECK_FALSE(weak_cell_at(1, 6144, 65536));
    CHECK(weak_cell_at(5, 8, 8) == 5u);
}

TEST_CASE("headline bypass on mf-H-table")
{
    const auto p = preset_profile("mf-H-table");
    const auto bypass = run_attack(p, attack(1'600'000, 1'600'000), per_row(2'000'000), {}, 1);
    CHECK_FALSE(bypass.detected);
    CHECK(bypass.bypassed);
    CHECK(bypass.total_flips_target_row == 970);
    CHECK(bypass.expected_flips == 970);
    CHECK(bypass.total_acts == 6'400'000);
    CHECK(bypass.defense == "PerRowCounter@2000000");

    const auto ds = run_attack(p, attack(0, 2'000'000), per_row(2'000'000), {}, 1);
    CHECK(ds.detected);
    CHECK(ds.nrr_count == 2);
    CHECK(ds.model == AttackModel::DoubleSided);
}

TEST_CASE("non-limiting policies match an undefended run")
{
    const auto p = toy_profile();
    const auto a = toy_attack(1500, 1500);
    const auto base = run_attack(p, a, std::nullopt, {}, 3);
    CHECK(base.defense.empty());
    CHECK(base.total_flips_target_row > 0);
    for (auto policy : {MacPolicy::unlimited(), MacPolicy::untested()}) {
        DefenseConfig d;
        d.policy = policy;
        const auto r = run_attack(p, a, d, {}, 3);
        CHECK(r.flips_per_row == base.flips_per_row);
        CHECK_FALSE(r.detected);
    }
    // A limit no row reaches behaves the same way.
    const auto high = run_attack(p, a, per_row(1501), {}, 3);
    CHECK(high.flips_per_row == base.flips_per_row);
    CHECK_FALSE(high.detected);
}

TEST_CASE("t_mac of one catches every attack and stops all flips")
{
    const auto p = toy_profile();
    const auto r = run_attack(p, toy_attack(1500, 1500), per_row(1), {}, 3);
    CHECK(r.detected);
    CHECK(r.nrr_count == 6000);
    // Every activation refreshes X once or twice, so X never builds up.
    CHECK(r.total_flips_target_row == 0);
    CHECK(attack_detected(toy_attack(1, 1), per_row(1), {}));
    CHECK_FALSE(attack_detected(toy_attack(5, 5), per_row(6), {}));
    CHECK(attack_detected(toy_attack(5, 5), per_row(5), {}));
}

TEST_CASE("runs are deterministic in the seed")
{
    const auto p = toy_profile();
    const auto a = toy_attack(1000, 2500);
    std::ostringstream x, y, z;
    write_report_csv(x, run_attack(p, a, std::nullopt, {}, 11));
    write_report_csv(y, run_attack(p, a, std::nullopt, {}, 11));
    write_report_csv(z, run_attack(p, a, std::nullopt, {}, 12));
    CHECK(x.str() == y.str());
    CHECK(x.str() != z.str());
}

TEST_CASE("direction rule limits flips")
{
    const auto p = toy_profile();
    auto a = toy_attack(2000, 2000);
    a.victim_pattern = RowData(1024, true); // same data as aggressors
    const auto r = run_attack(p, a, std::nullopt, {}, 1);
    CHECK(r.total_flips_target_row == 0);
    CHECK(r.expected_flips > 0);
}

TEST_CASE("flips earned before an NRR survive it")
{
    const auto p = toy_profile();
    Simulation sim(p, toy_attack(0, 1), {});
    const RowId x{0, 100};
    sim.add_hammers({0, 99}, 6000);
    sim.add_hammers({0, 101}, 6000);
    const double before = sim.current_fraction(x);
    CHECK(before > 0);
    sim.refresh(x);
    CHECK(sim.current_fraction(x) == 0);
    CHECK(sim.peak_fraction(x) == doctest::Approx(before));
    const auto first = sim.readback(1);
    CHECK(first.at(x) > 0);
    // Another smaller episode neither adds nor removes flips.
    sim.add_hammers({0, 99}, 100);
    const auto second = sim.readback(1);
    CHECK(second.at(x) == first.at(x));
    // Refreshing untracked rows is ignored.
    CHECK_NOTHROW(sim.refresh({0, 400}));
}

TEST_CASE("refresh windows split the disturbance")
{
    const auto p = toy_profile();
    const RowId x{0, 100};
    Simulation split(p, toy_attack(0, 1), {}, per_row(1'000'000));
    Simulation whole(p, toy_attack(0, 1), {});
    std::uint64_t tick = 0;
    for (int w = 0; w < 2; ++w) {
        for (int i = 0; i < 1500; ++i) {
            split.activate({0, 99}, tick++);
            split.activate({0, 101}, tick++);
        }
        split.refresh_all(tick);
    }
    whole.add_hammers({0, 99}, 3000);
    whole.add_hammers({0, 101}, 3000);
    CHECK(split.peak_fraction(x) < whole.peak_fraction(x));
    CHECK(split.readback(2).at(x) < whole.readback(2).at(x));
    REQUIRE(split.defense());
    CHECK(split.defense()->window_start() == tick);
    CHECK_FALSE(split.defense()->flag());
}

TEST_CASE("refresh budget is enforced")
{
    TimingParams t;
    t.refresh_enabled = true;
    const auto p = preset_profile("mf-H");
    CHECK_THROWS_AS(run_attack(p, attack(0, 2'000'000), std::nullopt, t, 1), BudgetError);
    CHECK_NOTHROW(run_attack(p, attack(0, 500'000), std::nullopt, t, 1));
    CHECK_THROWS_AS(sweep(p, attack(0, 1), {0}, {2e6}, {}, t, 1), BudgetError);
}

TEST_CASE("profile and geometry must agree")
{
    const auto p = preset_profile("mf-H");
    auto a = attack(0, 10);
    a.geometry.row_size_bits = 1024;
    a.aggressor_pattern = RowData(1024, true);
    a.victim_pattern = RowData(1024, false);
    CHECK_THROWS_AS(run_attack(p, a, std::nullopt, {}, 1), ConfigError);
}

TEST_CASE("sweep cells equal single runs")
{
    const auto p = toy_profile();
    const auto base = toy_attack(0, 1);
    const std::vector<double> s{0, 800, 1600}, t{0, 1000, 2500};
    const auto surf = sweep(p, base, s, t, {per_row(2000)}, {}, 9);
    REQUIRE(surf.cells.size() == 9);
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < t.size(); ++j) {
            const auto& c = surf.at(i, j);
            CHECK(c.S == s[i]);
            CHECK(c.T == t[j]);
            const auto a = toy_attack(static_cast<std::uint64_t>(s[i]), static_cast<std::uint64_t>(t[j]));
            const auto r = run_attack(p, a, std::nullopt, {}, 9);
            CHECK(c.sampled_flips == r.total_flips_target_row);
            CHECK(c.expected_flips == doctest::Approx(r.expected_flips));
            REQUIRE(c.detected.size() == 1);
            CHECK(c.detected[0] == (s[i] >= 2000 || t[j] >= 2000));
        }
    // Expected flips never fall along the T axis.
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j + 1 < t.size(); ++j)
            CHECK(surf.at(i, j).expected_flips <= surf.at(i, j + 1).expected_flips);
}

TEST_CASE("sweep output does not depend on the thread count")
{
    const auto p = toy_profile();
    const auto axis = log_axis(100, 5000, 8);
    std::ostringstream one, four;
    write_surface_csv(one, sweep(p, toy_attack(0, 1), axis, axis, {per_row(3000)}, {}, 4, 1));
    write_surface_csv(four, sweep(p, toy_attack(0, 1), axis, axis, {per_row(3000)}, {}, 4, 4));
    CHECK(one.str() == four.str());
}

TEST_CASE("surface writers")
{
    const auto p = toy_profile();
    const auto surf = sweep(p, toy_attack(0, 1), {0, 10}, {0, 20}, {per_row(15)}, {}, 1);
    std::ostringstream csv, mat;
    write_surface_csv(csv, surf);
    CHECK(csv.str().rfind("S,T,expected_flips,sampled_flips,detected_PerRowCounter@15\n0,0,0.000000,0,0\n", 0) == 0);
    write_surface_matrix(mat, surf);
    CHECK(mat.str().rfind("2 0 20\n0 0.000000 ", 0) == 0);

    std::ostringstream rep;
    write_report(rep, run_attack(p, toy_attack(0, 3), std::nullopt, {}, 1));
    CHECK(rep.str().find("model = DoubleSided\n") != std::string::npos);
    CHECK(rep.str().find("flips_98 = ") != std::string::npos);
    CHECK(rep.str().find("defense = none\n") != std::string::npos);
}

TEST_CASE("log_axis and sweep errors")
{
    CHECK(log_axis(10, 1000, 3) == std::vector<double>{0, 10, 100, 1000});
    CHECK(log_axis(5, 5, 1) == std::vector<double>{0, 5});
    CHECK_THROWS_AS(log_axis(0, 10, 3), ConfigError);
    const auto p = toy_profile();
    CHECK_THROWS_AS(sweep(p, toy_attack(0, 1), {}, {1}, {}, {}, 1), ConfigError);
    CHECK_THROWS_AS(sweep(p, toy_attack(0, 1), {1.5}, {1}, {}, {}, 1), ConfigError);
}

TEST_CASE("optimal set on a mf-C surface")
{
    const auto p = preset_profile("mf-C");
    std::vector<double> axis;
    for (int i = 0; i <= 25; ++i) axis.push_back(i * 100e3);
    AttackConfig base = attack(0, 1);
    // Expected flips are all that matter here; keep the sampled rows cheap.
    const auto surf = sweep(p, base, axis, axis, {}, {}, 1, 2);
    const auto best = find_optimal_set(surf, expected_flips(p, 0, 2e6));
    REQUIRE(best);
    CHECK(best->S == 1e6);
    CHECK(best->T == 1e6);
    CHECK(best->t_dbl == 2e6);
    CHECK(threshold_ratio(*best) == doctest::Approx(1.0));
}
