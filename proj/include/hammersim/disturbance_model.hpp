#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hammersim {

/// One measured point: S edge hammers, T near hammers, observed flips.
struct Anchor {
    double S = 0;
    double T = 0;
    double flips = 0;

    bool operator==(const Anchor&) const = default;
};

enum class ProfileMode { Analytic, TableDriven };

std::string_view to_string(ProfileMode mode);
ProfileMode parse_profile_mode(std::string_view text);

class AnchorTable;

/// Read-disturbance vulnerability of one vendor's chips.
///
/// Analytic profiles model each weak cell with a log-normal hammer threshold
/// and combine the two aggressor distances into an effective hammer count
///   E = T + alpha*S + gamma*sqrt(S*T).
/// Table-driven profiles interpolate measured anchors directly; if they also
/// carry analytic parameters, those shape the interpolation between anchors.
struct ChipProfile {
    std::string vendor_id = "custom";
    ProfileMode mode = ProfileMode::Analytic;
    double alpha = 0.0;
    double gamma = 0.0;
    double mu = 0.0;
    double sigma = 1.0;
    std::uint32_t cells_per_row = 65536;
    double onset_hc = 0.0;
    double saturation_hc = 0.0;
    std::vector<Anchor> anchors;
    /// Marks presets whose parameters reproduce described shapes rather than
    /// measured numbers.
    bool qualitative = false;

    /// Built by finalize(); required for table-driven evaluation.
    std::shared_ptr<const AnchorTable> table;

    /// Validates parameters, derives onset/saturation and, for table-driven
    /// profiles, builds the interpolation table. Throws ConfigError.
    void finalize();
    bool has_shape() const noexcept { return sigma > 0 && mu > 0; }
};

/// Fraction of cells below which a count is called onset / above which saturation.
inline constexpr double kOnsetQuantile = 0.001;
inline constexpr double kSaturationQuantile = 0.999;

double effective_disturbance(const ChipProfile& profile, double S, double T);

struct FlipEstimate {
    double flips = 0.0;
    bool extrapolated = false; // table-driven query outside the anchor hull
};

FlipEstimate estimate_flips(const ChipProfile& profile, double S, double T);
double expected_flips(const ChipProfile& profile, double S, double T);

/// Scalar that a cell's resistance is compared against: the effective hammer
/// count for analytic profiles, the expected flipped fraction for
/// table-driven ones. Monotone in S and T.
double disturbance_intensity(const ChipProfile& profile, double S, double T);

/// Per-cell resistances of one row realisation. Cell k flips once the
/// intensity reaches resistance[k].
///  - Analytic: iid log-normal thresholds theta_k drawn from (seed, k).
///  - Table-driven: stratified levels (rank + 0.5) / N under a seeded
///    permutation, so flipped counts equal round(expected).
std::vector<double> cell_resistances(const ChipProfile& profile, std::uint64_t seed);

/// Threshold of a single analytic cell; matches cell_resistances()[cell].
double cell_threshold(const ChipProfile& profile, std::uint64_t seed, std::uint32_t cell);

/// Cells (indices in [0, cells_per_row)) that flip at (S, T). Deterministic in seed.
std::vector<std::uint32_t> sample_flips(const ChipProfile& profile, std::uint64_t seed, double S,
                                        double T);

struct CalibrationOptions {
    /// Fraction of each data-demonstrated cross-column gain the fit must keep.
    double preserved_gain_fraction = 0.5;
    int restarts = 12;
    int max_iterations = 6000;
    std::string vendor_id = "calibrated";
};

struct CalibrationResult {
    ChipProfile profile;
    double mean_relative_error = 0.0;
    double sum_squared_error = 0.0;
    double objective = 0.0;
    std::vector<double> fitted; // per anchor, same order as input
    std::vector<std::string> warnings;
};

/// Fits (alpha, gamma, mu, sigma) of an analytic profile to measured anchors
/// by derivative-free minimisation of the mean relative deviation, alpha
/// clamped to [0, 1]. Needs >= 6 anchors covering two attack models.
/// Throws CalibrationError on degenerate input.
CalibrationResult calibrate(std::span<const Anchor> anchors, std::uint32_t cells_per_row,
                            const CalibrationOptions& options = {});

// ---------------------------------------------------------------------------
// Hammer-count search shared by classification and surface analysis.

struct GridPoint {
    double S = 0;
    double T = 0;
    double flips = 0;
};

struct OptimalSet {
    double S = 0;
    double T = 0;
    double flips = 0;
    double t_dbl = 0; // minimal double-sided count reaching the target
};

/// Among points with flips >= target and S, T < T_dbl (and < bound when
/// given): minimise |S-T|, then S+T, then S. T_dbl is the smallest S = 0
/// point reaching the target, +inf if there is none. nullopt when no point
/// qualifies.
std::optional<OptimalSet> select_optimal_set(std::span<const GridPoint> points, double flip_target,
                                             std::optional<double> bound = std::nullopt);

/// Linear grid 0, step, ..., max plus any extra coordinates, sorted, unique.
std::vector<double> search_axis(double max_hc, double step, std::span<const double> extra = {});

enum class ChipClass { Bypass, FailedBypass };
std::string_view to_string(ChipClass c);

struct Classification {
    ChipClass verdict = ChipClass::FailedBypass;
    std::optional<OptimalSet> witness;
    std::string reason;
};

struct ClassifyOptions {
    double max_hc = 10e6;
    double step = 100e3;
};

/// Bypass iff some (S, T) with both counts below T_dbl (and below t_mac when
/// given) reaches flip_target. Searches a linear grid plus anchor coordinates.
Classification classify_chip(const ChipProfile& profile, std::optional<double> t_mac,
                             double flip_target, const ClassifyOptions& options = {});

// ---------------------------------------------------------------------------
// Text format: "key = value" lines, then an optional "anchors:" line followed
// by a CSV block with header S,T,flips.

ChipProfile parse_profile(std::string_view text);
ChipProfile load_profile(const std::string& path);
std::string format_profile(const ChipProfile& profile);

std::vector<Anchor> parse_anchor_csv(std::string_view text);
std::vector<Anchor> load_anchor_csv(const std::string& path);

} // namespace hammersim
