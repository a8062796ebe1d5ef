#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace lid {

/// One per-point result row shared by every batch estimator.
struct LidRecord {
    Eigen::Index index = 0;
    double lid = std::numeric_limits<double>::quiet_NaN();
    /// Diffusion time used (fixed t0 or the detected knee); NaN when the
    /// estimator has no time parameter.
    double t0 = std::numeric_limits<double>::quiet_NaN();
    std::string trace_mode;
    bool fallback = false;
    /// Estimator-specific columns in a fixed order.
    std::vector<std::pair<std::string, double>> extra;
};

}  // namespace lid
