#include "hammersim/presets.hpp"

#include "hammersim/error.hpp"

namespace hammersim {

std::vector<Anchor> mfh_anchors()
{
    return {
        {0, 500e3, 200},     {0, 1e6, 522},       {0, 2e6, 980},       {0, 5e6, 1799},
        {0, 10e6, 2486},     {500e3, 0, 10},      {1e6, 0, 55},        {5e6, 0, 752},
        {8e6, 0, 1005},      {10e6, 0, 1343},     {500e3, 500e3, 215}, {900e3, 900e3, 514},
        {1.6e6, 1.6e6, 970}, {5e6, 5e6, 2557},    {10e6, 10e6, 3850},
    };
}

namespace {

// Threshold distribution shared by the qualitative presets.
constexpr double kMu = 16.38;
constexpr double kSigma = 1.4;

ChipProfile analytic(const char* id, double alpha, double gamma, double mu, double sigma,
                     std::uint32_t cells, bool qualitative)
{
    ChipProfile p;
    p.vendor_id = id;
    p.alpha = alpha;
    p.gamma = gamma;
    p.mu = mu;
    p.sigma = sigma;
    p.cells_per_row = cells;
    p.qualitative = qualitative;
    return p;
}

ChipProfile fitted_mfh()
{
    // calibrate(mfh_anchors(), 6144) with default options.
    ChipProfile p = analytic("mf-H", 0.4362319049, 0.6055218643, 16.37876311, 1.403199619, 6144, false);
    p.anchors = mfh_anchors();
    return p;
}

} // namespace

std::vector<std::string> preset_names()
{
    return {"mf-A", "mf-B", "mf-C", "mf-D", "mf-E", "mf-F", "mf-G", "mf-H", "mf-H-table"};
}

ChipProfile preset_profile(std::string_view name)
{
    ChipProfile p;
    if (name == "mf-A") {
        // Edge rows add nothing: raising T cannot lower S.
        p = analytic("mf-A", 0.0, 0.0, kMu, kSigma, 6144, true);
    } else if (name == "mf-B") {
        // Very few cells at risk.
        p = analytic("mf-B", 0.3, 0.5, kMu, kSigma, 64, true);
    } else if (name == "mf-C") {
        // (1M, 1M) beats double-sided 2M.
        p = analytic("mf-C", 0.5, 0.6, kMu, kSigma, 6144, true);
    } else if (name == "mf-D") {
        // Bypass at a high price: (0.9M, 0.9M) against double-sided 1M.
        p = analytic("mf-D", 0.1, 0.05, kMu, kSigma, 6144, true);
    } else if (name == "mf-E") {
        p = analytic("mf-E", 0.005, 0.01, kMu, kSigma, 6144, true);
    } else if (name == "mf-F") {
        p = analytic("mf-F", 0.008, 0.02, kMu, kSigma, 6144, true);
    } else if (name == "mf-G") {
        p = analytic("mf-G", 0.3, 0.9, kMu, kSigma, 6144, true);
    } else if (name == "mf-H") {
        p = fitted_mfh();
    } else if (name == "mf-H-table") {
        p = fitted_mfh();
        p.vendor_id = "mf-H-table";
        p.mode = ProfileMode::TableDriven;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    p.finalize();
    return p;
}

ChipProfile resolve_profile(const std::string& name_or_path)
{
    for (const auto& n : preset_names())
        if (n == name_or_path) return preset_profile(n);
    return load_profile(name_or_path);
}

} // namespace hammersim
