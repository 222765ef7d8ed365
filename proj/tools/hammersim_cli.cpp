// hammersim: command-line front end for the RowHammer simulator.
//
// Exit codes: 0 success, 1 configuration error, 2 budget or timing violation.

#include "hammersim/config.hpp"
#include "hammersim/defense.hpp"
#include "hammersim/disturbance_model.hpp"
#include "hammersim/engine.hpp"
#include "hammersim/error.hpp"
#include "hammersim/feasibility.hpp"
#include "hammersim/presets.hpp"
#include "hammersim/trace_engine.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

using namespace hammersim;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitBudget = 2;

/// Writes to the named file, or stdout for "" and "-".
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw ConfigError("cannot write " + path);
    }
    std::ostream& get() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::vector<double> parse_list(const std::string& text, const char* what)
{
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_double(item, what));
    return out;
}

TimingParams load_timing(const std::string& path)
{
    return path.empty() ? TimingParams{} : timing_from_config(KeyValueConfig::load(path));
}

/// A defense config file, or an inline "kind:t_mac[:size]" spec such as
/// "PerRowCounter:2M" or "GroupCounter:1M:8".
DefenseConfig load_defense(const std::string& spec)
{
    if (std::filesystem::exists(spec)) return defense_from_config(KeyValueConfig::load(spec));
    const auto parts = split(spec, ':');
    if (parts.size() < 2 || parts.size() > 3)
        throw ConfigError("defense '" + spec + "' is neither a file nor kind:t_mac[:size]");
    DefenseConfig d;
    d.kind = parse_tracker_kind(parts[0]);
    d.policy = parse_mac_policy(parts[1]);
    if (parts.size() == 3) {
        const auto n = static_cast<std::uint32_t>(parse_uint(parts[2], "size"));
        (d.kind == TrackerKind::GroupCounter ? d.group_size : d.num_counters) = n;
    }
    d.validate();
    return d;
}

AttackConfig load_attack(const std::string& path, std::uint64_t S, std::uint64_t T, bool override_counts)
{
    AttackConfig a;
    if (!path.empty()) {
        a = attack_from_config(KeyValueConfig::load(path));
    } else {
        a.apply_default_patterns();
    }
    if (override_counts) {
        a.S = S;
        a.T = T;
        a.model = AttackConfig::model_for(S, T);
    }
    a.validate();
    return a;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hammersim: multi-sided RowHammer attack and defense simulator"};
    app.require_subcommand(1);

    // compile
    auto* compile = app.add_subcommand("compile", "compile an attack config into a DDR4 command trace");
    std::string c_attack, c_timing, c_out;
    compile->add_option("--attack", c_attack, "attack config file")->required();
    compile->add_option("--timing", c_timing, "timing config file");
    compile->add_option("-o,--output", c_out, "trace file (default stdout)");

    // run
    auto* run = app.add_subcommand("run", "simulate one attack and report flips");
    std::string r_profile, r_attack, r_defense, r_timing, r_csv, r_nrr;
    std::uint64_t r_seed = 1;
    std::string r_S, r_T;
    run->add_option("--profile", r_profile, "preset name or profile file")->required();
    run->add_option("--attack", r_attack, "attack config file");
    auto* r_s_opt = run->add_option("-S", r_S, "edge hammer count (overrides the config)");
    auto* r_t_opt = run->add_option("-T", r_T, "near hammer count (overrides the config)");
    run->add_option("--defense", r_defense, "defense config file or kind:t_mac");
    run->add_option("--timing", r_timing, "timing config file");
    run->add_option("--seed", r_seed, "realisation seed");
    run->add_option("--csv", r_csv, "write per-row flips as CSV");
    run->add_option("--nrr-log", r_nrr, "write the NRR log as CSV");

    // sweep
    auto* sw = app.add_subcommand("sweep", "evaluate a grid of (S, T) hammer counts");
    std::string w_profile, w_attack, w_timing, w_out, w_plot, w_s, w_t;
    std::vector<std::string> w_defenses;
    std::uint64_t w_seed = 1;
    unsigned w_threads = 1;
    sw->add_option("--profile", w_profile, "preset name or profile file")->required();
    sw->add_option("--attack", w_attack, "attack config supplying target and patterns");
    sw->add_option("--s-values", w_s, "comma-separated S values (default: 0 and a log grid 100k..10M)");
    sw->add_option("--t-values", w_t, "comma-separated T values (default: same as S)");
    sw->add_option("--defense", w_defenses, "defense config file or kind:t_mac (repeatable)");
    sw->add_option("--timing", w_timing, "timing config file");
    sw->add_option("--seed", w_seed, "realisation seed");
    sw->add_option("--threads", w_threads, "worker threads");
    sw->add_option("-o,--output", w_out, "surface CSV (default stdout)");
    sw->add_option("--emit-plot-data", w_plot, "also write a gnuplot nonuniform matrix");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "fit an analytic profile to measured anchors");
    std::string k_anchors, k_out, k_vendor = "calibrated";
    std::uint32_t k_cells = 6144;
    double k_gain = 0.5;
    cal->add_option("--anchors", k_anchors, "anchor CSV (S,T,flips)")->required();
    cal->add_option("--cells", k_cells, "weak cells per row");
    cal->add_option("--vendor", k_vendor, "vendor label");
    cal->add_option("--preserve-gain", k_gain, "fraction of each measured two-sided gain to keep");
    cal->add_option("-o,--output", k_out, "profile file (default stdout)");

    // classify
    auto* cls = app.add_subcommand("classify", "Bypass / FailedBypass verdict for a profile");
    std::string l_profile;
    double l_target = 0, l_max = 10e6, l_step = 100e3;
    std::optional<double> l_tmac;
    cls->add_option("--profile", l_profile, "preset name or profile file")->required();
    cls->add_option("--target", l_target, "flip target")->required();
    cls->add_option("--t-mac", l_tmac, "also require S, T < t_mac");
    cls->add_option("--max-hc", l_max, "search bound per aggressor");
    cls->add_option("--step", l_step, "grid step");

    // optimal
    auto* opt = app.add_subcommand("optimal", "optimal (S, T) on a defense-free surface");
    std::string o_profile, o_s, o_t;
    double o_target = 0;
    std::optional<double> o_bound;
    opt->add_option("--profile", o_profile, "preset name or profile file")->required();
    opt->add_option("--target", o_target, "flip target")->required();
    opt->add_option("--s-values", o_s, "comma-separated S values (default: 0..10M step 100k)");
    opt->add_option("--t-values", o_t, "comma-separated T values (default: same as S)");
    opt->add_option("--t-mac", o_bound, "also require S, T < t_mac");

    // feasibility
    auto* fea = app.add_subcommand("feasibility", "which target cells an attack can flip undetected");
    std::string f_profile, f_defense, f_cells, f_map, f_timing, f_out, f_model = "AAVAA";
    std::uint64_t f_seed = 1;
    double f_max = 10e6;
    DramGeometry f_geom;
    fea->add_option("--profile", f_profile, "preset name or profile file")->required();
    fea->add_option("--defense", f_defense, "defense config file or kind:t_mac")->required();
    fea->add_option("--cells", f_cells, "target cells CSV (bank,row,cell,from,to)")->required();
    fea->add_option("--model", f_model, "DoubleSided, ARVRA or AAVAA");
    fea->add_option("--map", f_map, "logical->physical row map file");
    fea->add_option("--timing", f_timing, "timing config file");
    fea->add_option("--seed", f_seed, "realisation seed");
    fea->add_option("--max-hc", f_max, "search bound per aggressor");
    fea->add_option("--rows-per-bank", f_geom.rows_per_bank, "geometry");
    fea->add_option("--banks", f_geom.banks_per_chip, "geometry");
    fea->add_option("--row-bits", f_geom.row_size_bits, "geometry");
    fea->add_option("-o,--output", f_out, "verdict CSV (default stdout)");

    // profile
    auto* prof = app.add_subcommand("profile", "print a preset or profile file with derived fields");
    std::string p_name;
    prof->add_option("name", p_name, "preset name or profile file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*compile) {
            const auto attack = load_attack(c_attack, 0, 0, false);
            const auto trace = compile_counter_bypass(attack, load_timing(c_timing));
            const auto violations = validate_trace(trace);
            Output out(c_out);
            write_trace(out.get(), trace);
            for (const auto& v : violations)
                std::cerr << "violation " << to_string(v.kind) << " at " << v.index << ": " << v.detail << "\n";
            return violations.empty() ? 0 : kExitBudget;
        }
        if (*run) {
            const bool counts = r_s_opt->count() > 0 || r_t_opt->count() > 0;
            const auto attack = load_attack(r_attack, r_S.empty() ? 0 : parse_uint(r_S, "S"),
                                            r_T.empty() ? 0 : parse_uint(r_T, "T"), counts);
            const auto profile = resolve_profile(r_profile);
            std::optional<DefenseConfig> defense;
            if (!r_defense.empty()) defense = load_defense(r_defense);
            const auto report = run_attack(profile, attack, defense, load_timing(r_timing), r_seed);
            write_report(std::cout, report);
            if (!r_csv.empty()) {
                Output out(r_csv);
                write_report_csv(out.get(), report);
            }
            if (!r_nrr.empty()) {
                Output out(r_nrr);
                write_nrr_log_csv(out.get(), report.nrr_log);
            }
            return 0;
        }
        if (*sw) {
            const auto profile = resolve_profile(w_profile);
            const auto base = load_attack(w_attack, 0, 0, false);
            const auto s_values = w_s.empty() ? log_axis(100e3, 10e6, 13) : parse_list(w_s, "S");
            const auto t_values = w_t.empty() ? s_values : parse_list(w_t, "T");
            std::vector<DefenseConfig> defenses;
            for (const auto& d : w_defenses) defenses.push_back(load_defense(d));
            const auto surface =
                sweep(profile, base, s_values, t_values, defenses, load_timing(w_timing), w_seed, w_threads);
            Output out(w_out);
            write_surface_csv(out.get(), surface);
            if (!w_plot.empty()) {
                Output plot(w_plot);
                write_surface_matrix(plot.get(), surface);
            }
            return 0;
        }
        if (*cal) {
            CalibrationOptions options;
            options.vendor_id = k_vendor;
            options.preserved_gain_fraction = k_gain;
            const auto result = calibrate(load_anchor_csv(k_anchors), k_cells, options);
            Output out(k_out);
            out.get() << format_profile(result.profile);
            std::cerr << "mean_relative_error = " << result.mean_relative_error << "\n"
                      << "sum_squared_error = " << result.sum_squared_error << "\n";
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
            return 0;
        }
        if (*cls) {
            const auto profile = resolve_profile(l_profile);
            const auto c = classify_chip(profile, l_tmac, l_target, {l_max, l_step});
            std::cout << std::fixed << std::setprecision(0);
            std::cout << "verdict = " << to_string(c.verdict) << "\n";
            if (c.witness)
                std::cout << "S = " << c.witness->S << "\nT = " << c.witness->T << "\nflips = " << c.witness->flips
                          << "\nt_dbl = " << c.witness->t_dbl << "\n";
            std::cout << "reason = " << c.reason << "\n";
            return 0;
        }
        if (*opt) {
            const auto profile = resolve_profile(o_profile);
            const auto s_values = o_s.empty() ? search_axis(10e6, 100e3) : parse_list(o_s, "S");
            const auto t_values = o_t.empty() ? s_values : parse_list(o_t, "T");
            Surface surface;
            surface.s_values = s_values;
            surface.t_values = t_values;
            for (double S : s_values)
                for (double T : t_values) surface.cells.push_back({S, T, expected_flips(profile, S, T), 0, {}});
            const auto best = find_optimal_set(surface, o_target, o_bound);
            if (!best) {
                std::cout << "found = false\n";
                return 0;
            }
            std::cout << std::fixed << std::setprecision(0);
            std::cout << "found = true\nS = " << best->S << "\nT = " << best->T << "\nflips = " << best->flips
                      << "\nt_dbl = " << best->t_dbl << "\n"
                      << std::setprecision(4) << "ratio = " << threshold_ratio(*best) << "\n";
            return 0;
        }
        if (*fea) {
            const auto profile = resolve_profile(f_profile);
            FeasibilityOptions options;
            options.model = parse_attack_model(f_model);
            options.geometry = f_geom;
            options.geometry.validate();
            options.timing = load_timing(f_timing);
            options.max_hc = f_max;
            options.seed = f_seed;
            if (!f_map.empty()) options.map = PhysicalMap::load(f_map, f_geom.rows_per_bank);
            const auto verdicts = feasibility(profile, load_defense(f_defense),
                                              parse_target_cells(read_file(f_cells)), options);
            Output out(f_out);
            write_verdicts_csv(out.get(), verdicts);
            return 0;
        }
        if (*prof) {
            std::cout << format_profile(resolve_profile(p_name));
            return 0;
        }
    } catch (const BudgetError& e) {
        std::cerr << "hammersim: " << e.what() << "\n";
        return kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "hammersim: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
