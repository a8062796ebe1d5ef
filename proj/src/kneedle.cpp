#include "lid/kneedle.hpp"

#include <algorithm>
#include <vector>

#include "lid/errors.hpp"

namespace lid {

std::string to_string(KneeShape shape)
{
    switch (shape) {
    case KneeShape::ConcaveIncreasing: return "concave_increasing";
    case KneeShape::ConcaveDecreasing: return "concave_decreasing";
    case KneeShape::ConvexIncreasing: return "convex_increasing";
    case KneeShape::ConvexDecreasing: return "convex_decreasing";
    }
    return "?";
}

KneeShape knee_shape_from_string(const std::string& name)
{
    if (name == "concave_increasing") return KneeShape::ConcaveIncreasing;
    if (name == "concave_decreasing") return KneeShape::ConcaveDecreasing;
    if (name == "convex_increasing") return KneeShape::ConvexIncreasing;
    if (name == "convex_decreasing") return KneeShape::ConvexDecreasing;
    throw ValidationError("unknown knee shape '" + name + "'");
}

std::optional<Knee> kneedle(std::span<const double> xs, std::span<const double> ys, double sensitivity, KneeShape shape)
{
    const std::size_t n = xs.size();
    if (n != ys.size()) throw ValidationError("kneedle: xs and ys differ in length");
    if (n < 5) throw ValidationError("kneedle needs at least 5 points");
    if (!(sensitivity > 0.0)) throw ValidationError("kneedle sensitivity must be positive");
    for (std::size_t i = 1; i < n; ++i)
        if (!(xs[i] > xs[i - 1])) throw ValidationError("kneedle: xs must be strictly increasing");

    const auto [ylo, yhi] = std::minmax_element(ys.begin(), ys.end());
    if (*yhi == *ylo) return std::nullopt;
    const double xlo = xs.front();
    const double xspan = xs.back() - xs.front();
    const double yspan = *yhi - *ylo;

    const bool mirror_x = shape == KneeShape::ConcaveDecreasing || shape == KneeShape::ConvexIncreasing;
    const bool flip_y = shape == KneeShape::ConvexDecreasing || shape == KneeShape::ConvexIncreasing;

    // Oriented coordinates: position i maps back to original index origin[i].
    std::vector<double> xn(n), yn(n);
    std::vector<std::size_t> origin(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = mirror_x ? n - 1 - i : i;
        origin[i] = src;
        const double x = (xs[src] - xlo) / xspan;
        const double y = (ys[src] - *ylo) / yspan;
        xn[i] = mirror_x ? 1.0 - x : x;
        yn[i] = flip_y ? 1.0 - y : y;
    }

    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = yn[i] - xn[i];

    std::vector<bool> is_max(n, false), is_min(n, false);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        is_max[i] = diff[i] >= diff[i - 1] && diff[i] >= diff[i + 1];
        is_min[i] = diff[i] <= diff[i - 1] && diff[i] <= diff[i + 1];
    }
    const auto first_max = std::find(is_max.begin(), is_max.end(), true);
    if (first_max == is_max.end()) return std::nullopt;

    const double mean_gap = 1.0 / static_cast<double>(n - 1);
    double threshold = 0.0;
    std::size_t candidate = 0;
    for (std::size_t i = static_cast<std::size_t>(first_max - is_max.begin()); i + 1 < n; ++i) {
        if (is_max[i]) {
            threshold = diff[i] - sensitivity * mean_gap;
            candidate = i;
        }
        if (is_min[i]) threshold = 0.0;
        if (diff[i + 1] < threshold) return Knee{origin[candidate], xs[origin[candidate]]};
    }
    return std::nullopt;
}

}  // namespace lid
