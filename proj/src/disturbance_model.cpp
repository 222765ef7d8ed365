#include "hammersim/disturbance_model.hpp"

#include "anchor_table.hpp"
#include "disturbance_internal.hpp"
#include "hammersim/config.hpp"
#include "hammersim/error.hpp"
#include "rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace hammersim {

namespace detail {

double normal_quantile(double p)
{
    static const boost::math::normal standard;
    return boost::math::quantile(standard, p);
}

double analytic_flips(const ChipProfile& profile, double S, double T)
{
    const double e = effective_disturbance(profile, S, T);
    if (e <= 0) return 0.0;
    const double z = (std::log(e) - profile.mu) / profile.sigma;
    return static_cast<double>(profile.cells_per_row) * normal_cdf(z);
}

} // namespace detail

std::string_view to_string(ProfileMode mode)
{
    return mode == ProfileMode::Analytic ? "analytic" : "table_driven";
}

ProfileMode parse_profile_mode(std::string_view text)
{
    if (text == "analytic") return ProfileMode::Analytic;
    if (text == "table_driven" || text == "table") return ProfileMode::TableDriven;
    throw ConfigError("unknown profile mode '" + std::string(text) + "'");
}

namespace {

/// Smallest T on the double-sided axis with expected flips >= target, by
/// bisection; +inf if not reached by `limit`.
double double_sided_count_for(const ChipProfile& p, double target, double limit)
{
    if (expected_flips(p, 0, limit) < target) return std::numeric_limits<double>::infinity();
    double lo = 0, hi = limit;
    for (int i = 0; i < 200 && hi - lo > 1e-6 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (expected_flips(p, 0, mid) >= target ? hi : lo) = mid;
    }
    return hi;
}

} // namespace

void ChipProfile::finalize()
{
    if (cells_per_row == 0) throw ConfigError("profile: cells_per_row must be >= 1");
    if (alpha < 0 || alpha > 1) throw ConfigError("profile: alpha must lie in [0, 1]");
    if (gamma < 0) throw ConfigError("profile: gamma must be >= 0");

    if (mode == ProfileMode::Analytic) {
        if (!(sigma > 0)) throw ConfigError("profile: sigma must be > 0");
        table.reset();
        onset_hc = std::exp(mu + sigma * detail::normal_quantile(kOnsetQuantile));
        saturation_hc = std::exp(mu + sigma * detail::normal_quantile(kSaturationQuantile));
    } else {
        if (anchors.empty()) throw ConfigError("profile: table_driven mode needs anchors");
        table = std::make_shared<const AnchorTable>(anchors, *this);
        const double limit = table->t_axis().back();
        const double n = static_cast<double>(cells_per_row);
        onset_hc = double_sided_count_for(*this, kOnsetQuantile * n, limit);
        saturation_hc = double_sided_count_for(*this, kSaturationQuantile * n, limit);
    }
    if (!(onset_hc < saturation_hc))
        throw ConfigError("profile: onset_hc must be below saturation_hc");
}

double effective_disturbance(const ChipProfile& profile, double S, double T)
{
    S = std::max(S, 0.0);
    T = std::max(T, 0.0);
    return T + profile.alpha * S + profile.gamma * std::sqrt(S * T);
}

FlipEstimate estimate_flips(const ChipProfile& profile, double S, double T)
{
    if (profile.mode == ProfileMode::Analytic) return {detail::analytic_flips(profile, S, T), false};
    if (!profile.table) throw ConfigError("profile '" + profile.vendor_id + "' is not finalized");
    return (*profile.table)(S, T);
}

double expected_flips(const ChipProfile& profile, double S, double T)
{
    return estimate_flips(profile, S, T).flips;
}

double disturbance_intensity(const ChipProfile& profile, double S, double T)
{
    if (profile.mode == ProfileMode::Analytic) return effective_disturbance(profile, S, T);
    const double frac = expected_flips(profile, S, T) / static_cast<double>(profile.cells_per_row);
    return std::clamp(frac, 0.0, 1.0);
}

namespace detail {

std::vector<double> cell_levels(const ChipProfile& profile, std::uint64_t seed)
{
    const std::uint32_t n = profile.cells_per_row;
    std::vector<double> level(n);
    if (profile.mode == ProfileMode::Analytic) {
        for (std::uint32_t k = 0; k < n; ++k) level[k] = unit_open(hash_combine(seed, k));
        return level;
    }
    std::vector<std::uint32_t> rank(n);
    std::iota(rank.begin(), rank.end(), 0u);
    SplitMix rng(splitmix64(seed ^ 0x7ab1e5eedull));
    for (std::uint32_t i = n; i > 1; --i) {
        const auto j = static_cast<std::uint32_t>(rng.below(i));
        std::swap(rank[i - 1], rank[j]);
    }
    for (std::uint32_t k = 0; k < n; ++k) level[k] = (rank[k] + 0.5) / n;
    return level;
}

double flip_fraction(const ChipProfile& profile, double S, double T)
{
    return std::clamp(expected_flips(profile, S, T) / profile.cells_per_row, 0.0, 1.0);
}

} // namespace detail

double cell_threshold(const ChipProfile& profile, std::uint64_t seed, std::uint32_t cell)
{
    if (cell >= profile.cells_per_row) throw std::out_of_range("cell_threshold: cell out of range");
    if (profile.mode == ProfileMode::TableDriven) return detail::cell_levels(profile, seed)[cell];
    const double u = detail::unit_open(detail::hash_combine(seed, cell));
    return std::exp(profile.mu + profile.sigma * detail::normal_quantile(u));
}

std::vector<double> cell_resistances(const ChipProfile& profile, std::uint64_t seed)
{
    auto r = detail::cell_levels(profile, seed);
    if (profile.mode == ProfileMode::Analytic)
        for (auto& x : r) x = std::exp(profile.mu + profile.sigma * detail::normal_quantile(x));
    return r;
}

std::vector<std::uint32_t> sample_flips(const ChipProfile& profile, std::uint64_t seed, double S,
                                        double T)
{
    // level <= fraction is the same event as resistance <= intensity, without
    // a quantile per cell.
    const double p = detail::flip_fraction(profile, S, T);
    std::vector<std::uint32_t> out;
    if (p <= 0) return out;
    const auto level = detail::cell_levels(profile, seed);
    for (std::uint32_t k = 0; k < level.size(); ++k)
        if (level[k] <= p) out.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------
// Text formats

namespace {

std::string fmt_double(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

} // namespace

std::vector<Anchor> parse_anchor_csv(std::string_view text)
{
    std::vector<Anchor> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        if (std::isalpha(static_cast<unsigned char>(line[0]))) {
            if (line != "S,T,flips")
                throw ConfigError("anchor CSV line " + std::to_string(lineno) +
                                  ": expected header S,T,flips");
            continue;
        }
        auto cols = split(line, ',');
        if (cols.size() != 3)
            throw ConfigError("anchor CSV line " + std::to_string(lineno) + ": expected 3 columns");
        out.push_back({parse_double(cols[0], "S"), parse_double(cols[1], "T"),
                       parse_double(cols[2], "flips")});
    }
    return out;
}

std::vector<Anchor> load_anchor_csv(const std::string& path)
{
    return parse_anchor_csv(read_file(path));
}

ChipProfile parse_profile(std::string_view text)
{
    std::string body(text);
    std::string anchors_block;
    {
        std::istringstream in(body);
        std::string line, head;
        bool in_anchors = false;
        while (std::getline(in, line)) {
            if (!in_anchors && trim(line) == "anchors:") {
                in_anchors = true;
                continue;
            }
            (in_anchors ? anchors_block : head) += line + "\n";
        }
        body = head;
    }

    const KeyValueConfig kv = KeyValueConfig::parse(body);
    kv.require_known({"vendor", "mode", "alpha", "gamma", "mu", "sigma", "cells_per_row",
                      "qualitative", "onset_hc", "saturation_hc"});
    ChipProfile p;
    p.vendor_id = kv.get_string("vendor", "custom");
    p.mode = parse_profile_mode(kv.get_string("mode", "analytic"));
    p.alpha = kv.get_double("alpha", 0.0);
    p.gamma = kv.get_double("gamma", 0.0);
    p.mu = kv.get_double("mu", 0.0);
    p.sigma = kv.get_double("sigma", p.mode == ProfileMode::Analytic ? 1.0 : 0.0);
    p.cells_per_row = static_cast<std::uint32_t>(kv.get_uint("cells_per_row", 65536));
    p.qualitative = kv.get_bool("qualitative", false);
    p.anchors = parse_anchor_csv(anchors_block);
    p.finalize();
    return p;
}

ChipProfile load_profile(const std::string& path)
{
    try {
        return parse_profile(read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string format_profile(const ChipProfile& p)
{
    std::ostringstream os;
    os << "vendor = " << p.vendor_id << "\n"
       << "mode = " << to_string(p.mode) << "\n"
       << "alpha = " << fmt_double(p.alpha) << "\n"
       << "gamma = " << fmt_double(p.gamma) << "\n"
       << "mu = " << fmt_double(p.mu) << "\n"
       << "sigma = " << fmt_double(p.sigma) << "\n"
       << "cells_per_row = " << p.cells_per_row << "\n"
       << "# derived on load\n"
       << "onset_hc = " << fmt_double(p.onset_hc) << "\n"
       << "saturation_hc = " << fmt_double(p.saturation_hc) << "\n";
    if (p.qualitative) os << "qualitative = true\n";
    if (!p.anchors.empty()) {
        os << "anchors:\nS,T,flips\n";
        for (const auto& a : p.anchors)
            os << fmt_double(a.S) << "," << fmt_double(a.T) << "," << fmt_double(a.flips) << "\n";
    }
    return os.str();
}

} // namespace hammersim
