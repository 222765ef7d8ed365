#include "anchor_table.hpp"

#include "disturbance_internal.hpp"
#include "hammersim/error.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace hammersim {

namespace {

std::vector<double> unique_sorted(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::string describe(const Anchor& a)
{
    return "(" + std::to_string(static_cast<long long>(a.S)) + "," +
           std::to_string(static_cast<long long>(a.T)) + ")=" +
           std::to_string(static_cast<long long>(a.flips));
}

} // namespace

AnchorTable::AnchorTable(std::span<const Anchor> anchors, const ChipProfile& shape)
{
    std::vector<Anchor> pts(anchors.begin(), anchors.end());
    pts.push_back({0, 0, 0});
    for (const auto& a : pts)
        if (a.S < 0 || a.T < 0 || a.flips < 0) throw ConfigError("anchor table: negative entry");

    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const auto& a = pts[i];
            const auto& b = pts[j];
            if (a.S == b.S && a.T == b.T && a.flips != b.flips)
                throw ConfigError("anchor table: conflicting duplicates " + describe(a) + " and " +
                                  describe(b));
            if (a.S <= b.S && a.T <= b.T && a.flips > b.flips)
                throw ConfigError("anchor table: " + describe(a) + " exceeds dominating anchor " +
                                  describe(b));
        }
    }

    std::vector<double> s, t;
    for (const auto& a : pts) {
        s.push_back(a.S);
        t.push_back(a.T);
    }
    s_axis_ = unique_sorted(std::move(s));
    t_axis_ = unique_sorted(std::move(t));

    const double cap = static_cast<double>(shape.cells_per_row);
    values_.assign(s_axis_.size() * t_axis_.size(), 0.0);
    for (std::size_t i = 0; i < s_axis_.size(); ++i) {
        for (std::size_t j = 0; j < t_axis_.size(); ++j) {
            const double S = s_axis_[i], T = t_axis_[j];
            double lower = 0.0, upper = cap;
            std::optional<double> exact;
            for (const auto& a : pts) {
                if (a.S == S && a.T == T) exact = a.flips;
                if (a.S <= S && a.T <= T) lower = std::max(lower, a.flips);
                if (a.S >= S && a.T >= T) upper = std::min(upper, a.flips);
            }
            double v;
            if (exact) {
                v = *exact;
            } else {
                const double guess =
                    shape.has_shape() ? detail::analytic_flips(shape, S, T) : 0.5 * (lower + upper);
                v = std::clamp(guess, lower, std::max(lower, upper));
            }
            values_[i * t_axis_.size() + j] = v;
        }
    }
}

FlipEstimate AnchorTable::operator()(double S, double T) const
{
    FlipEstimate out;
    const double s_max = s_axis_.back(), t_max = t_axis_.back();
    if (S > s_max || T > t_max) out.extrapolated = true;
    S = std::clamp(S, 0.0, s_max);
    T = std::clamp(T, 0.0, t_max);

    auto locate = [](const std::vector<double>& axis, double x) {
        if (axis.size() == 1) return std::pair<std::size_t, double>{0, 0.0};
        auto it = std::upper_bound(axis.begin(), axis.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - axis.begin());
        if (hi >= axis.size()) hi = axis.size() - 1;
        if (hi == 0) hi = 1;
        const std::size_t lo = hi - 1;
        const double w = (x - axis[lo]) / (axis[hi] - axis[lo]);
        return std::pair<std::size_t, double>{lo, std::clamp(w, 0.0, 1.0)};
    };

    const auto [i, u] = locate(s_axis_, S);
    const auto [j, v] = locate(t_axis_, T);
    const std::size_t i1 = std::min(i + 1, s_axis_.size() - 1);
    const std::size_t j1 = std::min(j + 1, t_axis_.size() - 1);
    const double f00 = node(i, j), f01 = node(i, j1), f10 = node(i1, j), f11 = node(i1, j1);
    out.flips = (1 - u) * (1 - v) * f00 + (1 - u) * v * f01 + u * (1 - v) * f10 + u * v * f11;
    return out;
}

} // namespace hammersim
