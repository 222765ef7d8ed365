#include "hammersim/defense.hpp"
#include "hammersim/error.hpp"

#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

using namespace hammersim;

namespace {

DramGeometry small_geometry()
{
    DramGeometry g;
    g.banks_per_chip = 2;
    g.rows_per_bank = 256;
    g.row_size_bits = 64;
    return g;
}

DefenseConfig per_row(std::uint64_t t_mac)
{
    DefenseConfig d;
    d.policy = MacPolicy::limit(t_mac);
    return d;
}

std::vector<std::uint32_t> rows_of(const std::vector<RowId>& ids)
{
    std::vector<std::uint32_t> out;
    for (auto r : ids) out.push_back(r.row);
    return out;
}

} // namespace

TEST_CASE("per-row counter trips at t_mac")
{
    DefenseState s(per_row(3), small_geometry());
    CHECK(s.observe_activate({0, 5}, 1).empty());
    CHECK(s.observe_activate({0, 5}, 2).empty());
    CHECK(s.count({0, 5}) == 2);
    const auto ev = s.observe_activate({0, 5}, 3);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].tick == 3);
    CHECK(ev[0].aggressor == RowId{0, 5});
    CHECK(rows_of(ev[0].refreshed) == std::vector<std::uint32_t>{4, 6});
    CHECK(s.detected());
    CHECK(s.flag());
    CHECK_FALSE(s.is_bypassed());
    CHECK(s.count({0, 5}) == 0); // reset on NRR
    // Other banks are separate rows.
    CHECK(s.count({1, 5}) == 0);
}

TEST_CASE("without reset every further ACT trips again")
{
    auto d = per_row(2);
    d.reset_on_nrr = false;
    DefenseState s(d, small_geometry());
    s.observe_activate({0, 5}, 0);
    CHECK(s.observe_activate({0, 5}, 1).size() == 1);
    CHECK(s.observe_activate({0, 5}, 2).size() == 1);
    CHECK(s.nrr_log().size() == 2);
}

TEST_CASE("unlimited and untested policies never refresh")
{
    for (auto policy : {MacPolicy::unlimited(), MacPolicy::untested()}) {
        DefenseConfig d;
        d.policy = policy;
        DefenseState s(d, small_geometry());
        for (int i = 0; i < 10000; ++i) CHECK(s.observe_activate({0, 7}, i).empty());
        CHECK(s.count({0, 7}) == 10000);
        CHECK(s.is_bypassed());
    }
}

TEST_CASE("edge rows refresh only the neighbour that exists")
{
    DefenseState s(per_row(1), small_geometry());
    const auto ev = s.observe_activate({0, 0}, 0);
    REQUIRE(ev.size() == 1);
    CHECK(rows_of(ev[0].refreshed) == std::vector<std::uint32_t>{1});
}

TEST_CASE("window rollover clears counters and the flag but keeps the log")
{
    DefenseState s(per_row(3), small_geometry());
    s.observe_activate({0, 9}, 0);
    s.observe_activate({0, 9}, 1);
    s.observe_activate({0, 9}, 2);
    s.observe_activate({0, 10}, 3);
    CHECK(s.flag());
    s.window_rollover(100);
    CHECK_FALSE(s.flag());
    CHECK(s.count({0, 10}) == 0);
    CHECK(s.nrr_log().size() == 1);
    CHECK(s.window_start() == 100);
    // Two ACTs in each of two windows never add up to three.
    s.observe_activate({0, 11}, 100);
    s.observe_activate({0, 11}, 101);
    s.window_rollover(200);
    s.observe_activate({0, 11}, 200);
    CHECK(s.observe_activate({0, 11}, 201).empty());
    CHECK_THROWS_AS(s.observe_activate({0, 11}, 150), std::invalid_argument);
    CHECK_THROWS_AS(s.window_rollover(10), std::invalid_argument);
}

TEST_CASE("group counter shares one count per group")
{
    DefenseConfig d = per_row(4);
    d.kind = TrackerKind::GroupCounter;
    d.group_size = 8;
    DefenseState s(d, small_geometry());
    s.observe_activate({0, 16}, 0);
    s.observe_activate({0, 17}, 1);
    s.observe_activate({0, 23}, 2);
    CHECK(s.count({0, 20}) == 3);
    CHECK(s.count({0, 24}) == 0);
    const auto ev = s.observe_activate({0, 18}, 3);
    REQUIRE(ev.size() == 1);
    std::vector<std::uint32_t> want;
    for (std::uint32_t r = 15; r <= 24; ++r) want.push_back(r);
    CHECK(rows_of(ev[0].refreshed) == want);
    CHECK(d.label() == "GroupCounter@4");
}

TEST_CASE("Misra-Gries example with two counters")
{
    DefenseConfig d = per_row(3);
    d.kind = TrackerKind::FrequentItem;
    d.num_counters = 2;
    DefenseState s(d, small_geometry());
    s.observe_activate({0, 1}, 0); // {1:1}
    s.observe_activate({0, 2}, 1); // {1:1, 2:1}
    s.observe_activate({0, 3}, 2); // decrement all: {}
    CHECK(s.count({0, 1}) == 0);
    CHECK(s.count({0, 2}) == 0);
    CHECK(s.count({0, 3}) == 0);
    s.observe_activate({0, 1}, 3);
    s.observe_activate({0, 1}, 4);
    CHECK(s.count({0, 1}) == 2);
    const auto ev = s.observe_activate({0, 1}, 5);
    REQUIRE(ev.size() == 1);
    CHECK(s.count({0, 1}) == 0); // removed on NRR
}

TEST_CASE("Misra-Gries estimates stay within the error bound")
{
    std::mt19937_64 rng(21);
    for (std::uint32_t k : {1u, 3u, 8u}) {
        DefenseConfig d;
        d.kind = TrackerKind::FrequentItem;
        d.policy = MacPolicy::unlimited();
        d.num_counters = k;
        DefenseState s(d, small_geometry());
        std::map<std::uint32_t, std::uint64_t> truth;
        const std::uint64_t n = 5000;
        // Skewed stream: a few hot rows and a long tail.
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::uint32_t row = (rng() % 3 == 0) ? static_cast<std::uint32_t>(rng() % 4)
                                                       : static_cast<std::uint32_t>(rng() % 200);
            truth[row]++;
            s.observe_activate({0, row}, i);
        }
        for (std::uint32_t r = 0; r < 200; ++r) {
            const auto est = s.count({0, r});
            const auto real = truth[r];
            CHECK(est <= real);
            CHECK(real - est <= n / (k + 1));
        }
    }
}

TEST_CASE("benign traces never trip, one row at t_mac trips once")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint64_t t_mac = 2 + rng() % 50;
        const auto g = small_geometry();
        std::vector<RowId> acts;
        for (std::uint32_t r = 0; r < 20; ++r) {
            const auto count = rng() % t_mac; // strictly below t_mac
            for (std::uint64_t i = 0; i < count; ++i) acts.push_back({0, static_cast<std::uint32_t>(rng() % 256)});
        }
        // Rows chosen above may repeat, so cap them explicitly.
        std::map<RowId, std::uint64_t> seen;
        std::vector<RowId> benign;
        for (auto r : acts)
            if (++seen[r] < t_mac) benign.push_back(r);
        std::shuffle(benign.begin(), benign.end(), rng);

        DefenseState s(per_row(t_mac), g);
        std::uint64_t tick = 0;
        for (auto r : benign) CHECK(s.observe_activate(r, tick++).empty());
        CHECK(s.is_bypassed());

        // Now one fresh row reaches exactly t_mac.
        const RowId hot{1, static_cast<std::uint32_t>(rng() % 256)};
        std::vector<RowId> attack = benign;
        for (std::uint64_t i = 0; i < t_mac; ++i) attack.push_back(hot);
        std::shuffle(attack.begin(), attack.end(), rng);
        DefenseState h(per_row(t_mac), g);
        std::uint64_t hot_seen = 0, crossing = 0;
        tick = 0;
        for (auto r : attack) {
            if (r == hot && ++hot_seen == t_mac) crossing = tick;
            h.observe_activate(r, tick++);
        }
        REQUIRE(h.nrr_log().size() == 1);
        CHECK(h.nrr_log()[0].tick == crossing);
        CHECK(h.nrr_log()[0].aggressor == hot);
    }
}

TEST_CASE("defense configuration errors")
{
    CHECK_THROWS_AS(per_row(0).validate(), ConfigError);
    DefenseConfig g;
    g.kind = TrackerKind::GroupCounter;
    g.group_size = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    DefenseConfig m;
    m.kind = TrackerKind::FrequentItem;
    m.num_counters = 0;
    CHECK_THROWS_AS(DefenseState(m, small_geometry()), ConfigError);
    CHECK(parse_mac_policy("unlimited").kind == MacPolicy::Kind::Unlimited);
    CHECK(parse_mac_policy("2M").t_mac == 2000000);
    CHECK_THROWS_AS(parse_mac_policy("0"), ConfigError);
    CHECK_THROWS_AS(parse_tracker_kind("bloom"), ConfigError);
    CHECK(parse_tracker_kind("misra_gries") == TrackerKind::FrequentItem);

    DefenseState s(per_row(2), small_geometry());
    CHECK_THROWS_AS(s.observe_activate({2, 0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(s.observe_activate({0, 256}, 0), std::invalid_argument);
}

TEST_CASE("NRR log CSV")
{
    DefenseState s(per_row(1), small_geometry());
    s.observe_activate({0, 10}, 7);
    s.observe_activate({0, 255}, 8);
    std::ostringstream out;
    write_nrr_log_csv(out, s.nrr_log());
    CHECK(out.str() == "tick,aggressor_row,refreshed_rows\n7,10,9;11\n8,255,254\n");
}
