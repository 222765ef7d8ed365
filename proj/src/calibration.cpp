#include "disturbance_internal.hpp"
#include "hammersim/disturbance_model.hpp"
#include "hammersim/attack.hpp"
#include "hammersim/error.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

namespace hammersim {

namespace {

constexpr double kInfeasible = 1e30;
constexpr double kGainPenalty = 1e4;

/// A data-demonstrated gain of a two-sided anchor over a double-sided anchor
/// that spends at least as many total hammers.
struct Gain {
    std::size_t interior;
    std::size_t axis;
    double required;
};

struct Problem {
    std::vector<Anchor> anchors;
    std::uint32_t cells;
    std::vector<Gain> gains;
};

ChipProfile make_profile(const gsl_vector* x, std::uint32_t cells)
{
    ChipProfile p;
    p.alpha = gsl_vector_get(x, 0);
    p.gamma = gsl_vector_get(x, 1);
    p.mu = gsl_vector_get(x, 2);
    p.sigma = std::exp(gsl_vector_get(x, 3));
    p.cells_per_row = cells;
    return p;
}

double relative_error(double fitted, double measured)
{
    return std::abs(fitted - measured) / std::max(measured, 1.0);
}

double objective(const gsl_vector* x, void* params)
{
    const auto& prob = *static_cast<const Problem*>(params);
    const ChipProfile p = make_profile(x, prob.cells);
    if (!(p.alpha >= 0 && p.alpha <= 1 && p.gamma >= 0 && p.sigma > 1e-3 && p.sigma < 50))
        return kInfeasible;

    std::vector<double> f(prob.anchors.size());
    double err = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = detail::analytic_flips(p, prob.anchors[i].S, prob.anchors[i].T);
        err += relative_error(f[i], prob.anchors[i].flips);
    }
    err /= static_cast<double>(f.size());

    double penalty = 0;
    for (const auto& g : prob.gains) {
        const double shortfall = g.required - (f[g.interior] - f[g.axis]);
        if (shortfall > 0) {
            const double r = shortfall / g.required;
            penalty += r + r * r;
        }
    }
    const double value = err + kGainPenalty * penalty;
    return std::isfinite(value) ? value : kInfeasible;
}

std::vector<Gain> demonstrated_gains(const std::vector<Anchor>& anchors, double fraction)
{
    std::vector<Gain> out;
    if (fraction <= 0) return out;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const auto& a = anchors[i];
        if (a.S <= 0 || a.T <= 0) continue;
        for (std::size_t j = 0; j < anchors.size(); ++j) {
            const auto& b = anchors[j];
            if (b.S != 0 || b.T < a.S + a.T || a.flips <= b.flips) continue;
            out.push_back({i, j, fraction * (a.flips - b.flips)});
        }
    }
    return out;
}

/// Probit regression of the double-sided anchors: Phi^-1(flips/N) = (ln T - mu)/sigma.
std::pair<double, double> probit_start(const std::vector<Anchor>& anchors, std::uint32_t cells)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& a : anchors) {
        if (a.S != 0 || a.T <= 0 || a.flips <= 0 || a.flips >= cells) continue;
        const double x = std::log(a.T);
        const double y = detail::normal_quantile(a.flips / cells);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) {
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (slope > 0) {
            const double intercept = (sy - slope * sx) / n;
            return {-intercept / slope, 1.0 / slope};
        }
    }
    double hi = 1;
    for (const auto& a : anchors) hi = std::max({hi, a.S, a.T});
    return {std::log(hi), 1.0};
}

struct Fit {
    std::array<double, 4> x;
    double value;
};

Fit run_simplex(Problem& prob, const std::array<double, 4>& start, int max_iterations)
{
    using Minimizer = std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)>;
    using Vector = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;

    Vector x(gsl_vector_alloc(4), &gsl_vector_free);
    Vector step(gsl_vector_alloc(4), &gsl_vector_free);
    for (std::size_t i = 0; i < 4; ++i) gsl_vector_set(x.get(), i, start[i]);
    const std::array<double, 4> steps{0.05, 0.1, 0.5, 0.1};
    for (std::size_t i = 0; i < 4; ++i) gsl_vector_set(step.get(), i, steps[i]);

    gsl_multimin_function fn{&objective, 4, &prob};
    Minimizer m(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4),
                &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());
    for (int it = 0; it < max_iterations; ++it) {
        if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), 1e-9) == GSL_SUCCESS) break;
    }
    Fit fit{};
    for (std::size_t i = 0; i < 4; ++i) fit.x[i] = gsl_vector_get(m->x, i);
    fit.value = m->fval;
    return fit;
}

void check_input(const std::vector<Anchor>& anchors, std::uint32_t cells)
{
    if (cells == 0) throw CalibrationError("calibrate: cells_per_row must be >= 1");
    if (anchors.size() < 6)
        throw CalibrationError("calibrate: need at least 6 anchors, got " +
                               std::to_string(anchors.size()));
    std::set<AttackModel> models;
    bool any = false;
    for (const auto& a : anchors) {
        if (!(a.S >= 0 && a.T >= 0 && a.flips >= 0) || !std::isfinite(a.S + a.T + a.flips))
            throw CalibrationError("calibrate: anchors must be finite and non-negative");
        if (a.flips > cells)
            throw CalibrationError("calibrate: anchor flips exceed cells_per_row");
        if (a.S == 0 && a.T == 0) continue;
        models.insert(AttackConfig::model_for(static_cast<std::uint64_t>(a.S),
                                              static_cast<std::uint64_t>(a.T)));
        any = any || a.flips > 0;
    }
    if (!any) throw CalibrationError("calibrate: degenerate anchors (all flips are zero)");
    if (models.size() < 2)
        throw CalibrationError("calibrate: anchors must span at least two attack models");
}

} // namespace

CalibrationResult calibrate(std::span<const Anchor> anchors_in, std::uint32_t cells_per_row,
                            const CalibrationOptions& options)
{
    std::vector<Anchor> anchors(anchors_in.begin(), anchors_in.end());
    check_input(anchors, cells_per_row);
    gsl_set_error_handler_off();

    Problem prob{anchors, cells_per_row,
                 demonstrated_gains(anchors, options.preserved_gain_fraction)};

    const auto [mu0, sigma0] = probit_start(anchors, cells_per_row);
    const std::array<double, 4> alphas{0.3, 0.1, 0.6, 0.9};
    const std::array<double, 3> gammas{0.8, 0.3, 1.5};
    std::vector<std::array<double, 4>> starts;
    for (double g : gammas)
        for (double a : alphas) starts.push_back({a, g, mu0, std::log(sigma0)});
    starts.resize(std::min<std::size_t>(starts.size(), std::max(1, options.restarts)));

    Fit best{{}, kInfeasible * 2};
    for (const auto& s : starts) {
        Fit f = run_simplex(prob, s, options.max_iterations);
        // Restart from the result to escape a collapsed simplex.
        f = run_simplex(prob, f.x, options.max_iterations);
        if (f.value < best.value) best = f;
    }
    if (!(best.value < kInfeasible)) throw CalibrationError("calibrate: no feasible fit found");

    CalibrationResult out;
    ChipProfile& p = out.profile;
    p.vendor_id = options.vendor_id;
    p.mode = ProfileMode::Analytic;
    p.alpha = std::clamp(best.x[0], 0.0, 1.0);
    p.gamma = std::max(best.x[1], 0.0);
    p.mu = best.x[2];
    p.sigma = std::exp(best.x[3]);
    p.cells_per_row = cells_per_row;
    p.anchors = anchors;
    p.finalize();

    out.objective = best.value;
    for (const auto& a : anchors) {
        const double f = expected_flips(p, a.S, a.T);
        out.fitted.push_back(f);
        out.mean_relative_error += relative_error(f, a.flips);
        out.sum_squared_error += (f - a.flips) * (f - a.flips);
    }
    out.mean_relative_error /= static_cast<double>(anchors.size());

    for (const auto& a : anchors) {
        if (a.T != 0 || a.S <= 0) continue;
        for (const auto& b : anchors) {
            if (b.S == 0 && b.T == a.S && a.flips > b.flips) {
                std::ostringstream os;
                os << "alpha <= 1 constraint is binding: flips(" << a.S << ",0)=" << a.flips
                   << " exceeds flips(0," << b.T << ")=" << b.flips;
                out.warnings.push_back(os.str());
            }
        }
    }
    if (p.alpha >= 1 - 1e-6 && out.warnings.empty())
        out.warnings.push_back("alpha <= 1 constraint is binding: fitted alpha reached 1");
    for (const auto& g : prob.gains) {
        const double kept = out.fitted[g.interior] - out.fitted[g.axis];
        if (kept < g.required * (1 - 1e-6)) {
            std::ostringstream os;
            os << "fit keeps only " << kept << " of the required " << g.required
               << " flips gained by anchor (" << anchors[g.interior].S << ","
               << anchors[g.interior].T << ")";
            out.warnings.push_back(os.str());
        }
    }
    return out;
}

} // namespace hammersim
