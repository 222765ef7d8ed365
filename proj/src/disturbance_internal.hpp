#pragma once

#include "hammersim/disturbance_model.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace hammersim::detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_quantile(double p);

/// cells_per_row * Phi((ln E - mu) / sigma), 0 when E <= 0.
double analytic_flips(const ChipProfile& profile, double S, double T);

/// Per-cell levels in (0, 1): cell k flips once the expected flipped fraction
/// reaches level[k]. Analytic levels are the uniforms behind the log-normal
/// thresholds; table-driven levels are stratified.
std::vector<double> cell_levels(const ChipProfile& profile, std::uint64_t seed);

/// expected_flips / cells_per_row, clamped to [0, 1].
double flip_fraction(const ChipProfile& profile, double S, double T);

} // namespace hammersim::detail
