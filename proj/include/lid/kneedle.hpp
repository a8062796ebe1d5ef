#pragma once

#include <optional>
#include <span>
#include <string>

namespace lid {

/// Shape of the curve being searched; kneedle rotates every shape onto a
/// concave increasing one before looking for the knee.
enum class KneeShape {
    ConcaveIncreasing,
    ConcaveDecreasing,  ///< flat, then falls off (knee where the fall starts)
    ConvexIncreasing,
    ConvexDecreasing,  ///< falls steeply, then flattens (knee where it flattens)
};

std::string to_string(KneeShape shape);
KneeShape knee_shape_from_string(const std::string& name);

struct Knee {
    std::size_t index;
    double x;
};

/// Offline kneedle: min-max normalise both axes, orient to concave
/// increasing, form the difference curve y_n - x_n and report the first local
/// maximum that the curve later undercuts by sensitivity * mean x-spacing.
/// Returns nothing when no maximum qualifies. Needs at least 5 points and
/// strictly increasing xs.
std::optional<Knee> kneedle(std::span<const double> xs, std::span<const double> ys, double sensitivity = 1.0,
                            KneeShape shape = KneeShape::ConcaveIncreasing);

}  // namespace lid
