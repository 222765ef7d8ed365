#pragma once

#include "hammersim/disturbance_model.hpp"

#include <span>
#include <vector>

namespace hammersim {

/// Monotone bilinear interpolation over scattered (S, T, flips) anchors.
///
/// The anchors' S and T coordinates span a rectilinear grid. Grid nodes that
/// carry an anchor take its value exactly; the others take the profile's
/// analytic shape (or the midpoint of the bounds when there is none), clamped
/// to [max of anchors below, min of anchors above] in the componentwise order.
/// Both bounds are monotone, so the filled grid is monotone along each axis
/// and so is the bilinear interpolant.
class AnchorTable {
public:
    /// Throws ConfigError on contradictory anchors (a componentwise-larger
    /// anchor with fewer flips, or duplicates that disagree).
    AnchorTable(std::span<const Anchor> anchors, const ChipProfile& shape);

    FlipEstimate operator()(double S, double T) const;

    const std::vector<double>& s_axis() const noexcept { return s_axis_; }
    const std::vector<double>& t_axis() const noexcept { return t_axis_; }
    double node(std::size_t i, std::size_t j) const { return values_[i * t_axis_.size() + j]; }

private:
    std::vector<double> s_axis_;
    std::vector<double> t_axis_;
    std::vector<double> values_;
};

} // namespace hammersim
