#include "hammersim/config.hpp"
#include "hammersim/defense.hpp"
#include "hammersim/disturbance_model.hpp"
#include "hammersim/engine.hpp"
#include "hammersim/error.hpp"
#include "hammersim/feasibility.hpp"
#include "hammersim/presets.hpp"
#include "hammersim/trace_engine.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace hammersim;

namespace {

AttackConfig make_attack(std::uint64_t S, std::uint64_t T, std::uint32_t row, std::uint32_t bank)
{
    AttackConfig a;
    a.target = {bank, row};
    a.S = S;
    a.T = T;
    a.model = AttackConfig::model_for(S, T);
    a.apply_default_patterns();
    return a;
}

std::optional<DefenseConfig> make_defense(const std::optional<std::string>& kind, const std::string& t_mac,
                                          std::uint32_t group_size, std::uint32_t num_counters)
{
    if (!kind) return std::nullopt;
    DefenseConfig d;
    d.kind = parse_tracker_kind(*kind);
    d.policy = parse_mac_policy(t_mac);
    d.group_size = group_size;
    d.num_counters = num_counters;
    d.validate();
    return d;
}

TimingParams make_timing(bool refresh_enabled)
{
    TimingParams t;
    t.refresh_enabled = refresh_enabled;
    return t;
}

py::dict report_dict(const FlipReport& r)
{
    py::dict flips;
    for (const auto& [row, n] : r.flips_per_row) flips[py::int_(row.row)] = n;
    py::dict d;
    d["model"] = std::string(to_string(r.model));
    d["S"] = r.S;
    d["T"] = r.T;
    d["seed"] = r.seed;
    d["flips_per_row"] = flips;
    d["total_flips_target_row"] = r.total_flips_target_row;
    d["total_acts"] = r.total_acts;
    d["expected_flips"] = r.expected_flips;
    d["extrapolated"] = r.extrapolated;
    d["defense"] = r.defense;
    d["detected"] = r.detected;
    d["nrr_count"] = r.nrr_count;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Multi-sided RowHammer simulator core";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<LayoutError>(m, "LayoutError", base.ptr());
    py::register_exception<BudgetError>(m, "BudgetError", base.ptr());
    py::register_exception<CalibrationError>(m, "CalibrationError", base.ptr());

    py::class_<ChipProfile>(m, "ChipProfile")
        .def_readonly("vendor_id", &ChipProfile::vendor_id)
        .def_property_readonly("mode", [](const ChipProfile& p) { return std::string(to_string(p.mode)); })
        .def_readonly("alpha", &ChipProfile::alpha)
        .def_readonly("gamma", &ChipProfile::gamma)
        .def_readonly("mu", &ChipProfile::mu)
        .def_readonly("sigma", &ChipProfile::sigma)
        .def_readonly("cells_per_row", &ChipProfile::cells_per_row)
        .def_readonly("onset_hc", &ChipProfile::onset_hc)
        .def_readonly("saturation_hc", &ChipProfile::saturation_hc)
        .def_readonly("qualitative", &ChipProfile::qualitative)
        .def_property_readonly("anchors",
                               [](const ChipProfile& p) {
                                   std::vector<std::tuple<double, double, double>> out;
                                   for (const auto& a : p.anchors) out.emplace_back(a.S, a.T, a.flips);
                                   return out;
                               })
        .def("__repr__", [](const ChipProfile& p) { return "<ChipProfile " + p.vendor_id + ">"; });

    m.def("preset_names", &preset_names);
    m.def("preset_profile", [](const std::string& name) { return preset_profile(name); }, py::arg("name"));
    m.def("load_profile", &resolve_profile, py::arg("name_or_path"));
    m.def("parse_profile", [](const std::string& text) { return parse_profile(text); }, py::arg("text"));
    m.def("format_profile", &format_profile, py::arg("profile"));
    m.def("mfh_anchors", [] {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& a : mfh_anchors()) out.emplace_back(a.S, a.T, a.flips);
        return out;
    });

    m.def("effective_disturbance", &effective_disturbance, py::arg("profile"), py::arg("S"), py::arg("T"));
    m.def("expected_flips", &expected_flips, py::arg("profile"), py::arg("S"), py::arg("T"));
    m.def("sample_flips", &sample_flips, py::arg("profile"), py::arg("seed"), py::arg("S"), py::arg("T"));

    m.def(
        "calibrate",
        [](const std::vector<std::tuple<double, double, double>>& anchors, std::uint32_t cells_per_row) {
            std::vector<Anchor> a;
            for (const auto& [S, T, f] : anchors) a.push_back({S, T, f});
            const auto r = calibrate(a, cells_per_row);
            py::dict d;
            d["profile"] = r.profile;
            d["mean_relative_error"] = r.mean_relative_error;
            d["fitted"] = r.fitted;
            d["warnings"] = r.warnings;
            return d;
        },
        py::arg("anchors"), py::arg("cells_per_row") = 6144);

    m.def(
        "classify_chip",
        [](const ChipProfile& p, std::optional<double> t_mac, double flip_target) {
            const auto c = classify_chip(p, t_mac, flip_target);
            py::dict d;
            d["verdict"] = std::string(to_string(c.verdict));
            d["reason"] = c.reason;
            if (c.witness)
                d["witness"] = py::make_tuple(c.witness->S, c.witness->T, c.witness->flips, c.witness->t_dbl);
            else
                d["witness"] = py::none();
            return d;
        },
        py::arg("profile"), py::arg("t_mac") = py::none(), py::arg("flip_target"));

    m.def(
        "hammer_budget", [](bool refresh_enabled) { return hammer_budget(make_timing(refresh_enabled)); },
        py::arg("refresh_enabled") = true);

    m.def(
        "run_attack",
        [](const ChipProfile& p, std::uint64_t S, std::uint64_t T, std::optional<std::string> defense,
           const std::string& t_mac, std::uint32_t group_size, std::uint32_t num_counters, std::uint64_t seed,
           std::uint32_t row, std::uint32_t bank, bool refresh_enabled) {
            const auto d = make_defense(defense, t_mac, group_size, num_counters);
            FlipReport r;
            {
                py::gil_scoped_release release;
                r = run_attack(p, make_attack(S, T, row, bank), d, make_timing(refresh_enabled), seed);
            }
            return report_dict(r);
        },
        py::arg("profile"), py::arg("S"), py::arg("T"), py::arg("defense") = py::none(),
        py::arg("t_mac") = "unlimited", py::arg("group_size") = 8, py::arg("num_counters") = 16,
        py::arg("seed") = 1, py::arg("row") = 100, py::arg("bank") = 0, py::arg("refresh_enabled") = false);

    m.def(
        "sweep_csv",
        [](const ChipProfile& p, const std::vector<double>& s_values, const std::vector<double>& t_values,
           std::optional<std::string> defense, const std::string& t_mac, std::uint64_t seed, unsigned threads) {
            std::vector<DefenseConfig> defenses;
            if (auto d = make_defense(defense, t_mac, 8, 16)) defenses.push_back(*d);
            std::ostringstream os;
            {
                py::gil_scoped_release release;
                write_surface_csv(os, sweep(p, make_attack(0, 1, 100, 0), s_values, t_values, defenses,
                                            TimingParams{}, seed, threads));
            }
            return os.str();
        },
        py::arg("profile"), py::arg("s_values"), py::arg("t_values"), py::arg("defense") = py::none(),
        py::arg("t_mac") = "unlimited", py::arg("seed") = 1, py::arg("threads") = 1);

    m.def(
        "feasibility_csv",
        [](const ChipProfile& p, const std::string& cells_csv, const std::string& defense, const std::string& t_mac) {
            const auto d = make_defense(defense, t_mac, 8, 16);
            std::ostringstream os;
            write_verdicts_csv(os, feasibility(p, *d, parse_target_cells(cells_csv), FeasibilityOptions{}));
            return os.str();
        },
        py::arg("profile"), py::arg("cells_csv"), py::arg("defense") = "PerRowCounter", py::arg("t_mac") = "2M");
}
