#include "hammersim/disturbance_model.hpp"

#include "hammersim/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <tuple>

namespace hammersim {

std::optional<OptimalSet> select_optimal_set(std::span<const GridPoint> points, double flip_target,
                                             std::optional<double> bound)
{
    double t_dbl = std::numeric_limits<double>::infinity();
    for (const auto& p : points)
        if (p.S == 0 && p.flips >= flip_target) t_dbl = std::min(t_dbl, p.T);

    const double limit = bound ? std::min(*bound, t_dbl) : t_dbl;
    const GridPoint* best = nullptr;
    auto key = [](const GridPoint& p) { return std::tuple(std::abs(p.S - p.T), p.S + p.T, p.S); };
    for (const auto& p : points) {
        if (p.flips < flip_target || !(p.S < limit) || !(p.T < limit)) continue;
        if (!best || key(p) < key(*best)) best = &p;
    }
    if (!best) return std::nullopt;
    return OptimalSet{best->S, best->T, best->flips, t_dbl};
}

std::vector<double> search_axis(double max_hc, double step, std::span<const double> extra)
{
    if (!(max_hc >= 0) || !(step > 0)) throw ConfigError("search axis: need max >= 0 and step > 0");
    std::vector<double> axis;
    const auto n = static_cast<std::uint64_t>(std::floor(max_hc / step + 1e-9));
    for (std::uint64_t i = 0; i <= n; ++i) axis.push_back(static_cast<double>(i) * step);
    for (double e : extra)
        if (e >= 0 && e <= max_hc) axis.push_back(e);
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
    return axis;
}

std::string_view to_string(ChipClass c)
{
    return c == ChipClass::Bypass ? "Bypass" : "FailedBypass";
}

Classification classify_chip(const ChipProfile& profile, std::optional<double> t_mac,
                             double flip_target, const ClassifyOptions& options)
{
    std::vector<double> extra;
    for (const auto& a : profile.anchors) {
        extra.push_back(a.S);
        extra.push_back(a.T);
    }
    const auto axis = search_axis(options.max_hc, options.step, extra);

    std::vector<GridPoint> grid;
    grid.reserve(axis.size() * axis.size());
    double peak = 0;
    for (double S : axis)
        for (double T : axis) {
            const double f = expected_flips(profile, S, T);
            peak = std::max(peak, f);
            grid.push_back({S, T, f});
        }

    Classification out;
    std::ostringstream why;
    why << std::fixed << std::setprecision(0);
    if (peak < flip_target) {
        why << "flip target " << flip_target << " unreachable within " << options.max_hc
            << " hammers (max " << peak << ")";
        out.reason = why.str();
        return out;
    }
    out.witness = select_optimal_set(grid, flip_target, t_mac);
    if (!out.witness) {
        why << "no (S,T) below the double-sided count";
        if (t_mac) why << " and t_mac " << *t_mac;
        why << " reaches " << flip_target << " flips";
        out.reason = why.str();
        return out;
    }
    out.verdict = ChipClass::Bypass;
    why << "(" << out.witness->S << "," << out.witness->T << ") reaches " << out.witness->flips
        << " flips; double-sided needs " << out.witness->t_dbl;
    out.reason = why.str();
    return out;
}

} // namespace hammersim
