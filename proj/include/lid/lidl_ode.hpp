#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lid/flipd.hpp"
#include "lid/parallel.hpp"
#include "lid/record.hpp"
#include "lid/schedule.hpp"
#include "lid/score_model.hpp"

namespace lid {

/// Increasing log standard deviations delta_1 < ... < delta_m.
struct DeltaGrid {
    std::vector<double> deltas;

    /// e^delta in {0.01, 0.014, 0.019, 0.027, 0.037, 0.052, 0.072, 0.1}.
    static DeltaGrid standard();
    /// m evenly spaced deltas from lo to hi inclusive.
    static DeltaGrid linear(double lo, double hi, int m);
    static DeltaGrid from_scales(const std::vector<double>& std_devs);

    /// Strictly increasing, inside the schedule's delta range, and mapping to
    /// times no smaller than kTimeFloor.
    void validate(const Schedule& sched) const;
    std::string describe() const;
};

/// log rho(x, delta_i) up to a shared additive constant (the first entry is
/// 0), integrating d log rho / d delta = nu(t(delta)) with classic RK4 using
/// `rk_steps` steps per grid interval.
std::vector<double> log_rho_trajectory(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x,
                                       const DeltaGrid& grid, const TraceMode& mode = ExactTrace{},
                                       int rk_steps = 16, std::uint64_t stream = 0);

/// Ordinary least-squares slope of ys against xs.
double regression_slope(const std::vector<double>& xs, const std::vector<double>& ys);

struct LidlResult {
    double lid;
    double slope;
    std::vector<double> trajectory;
};

/// D plus the regression slope of the log rho trajectory.
LidlResult lidl_estimate(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x,
                         const DeltaGrid& grid, const TraceMode& mode = ExactTrace{}, int rk_steps = 16,
                         std::uint64_t stream = 0);

std::vector<LidRecord> lidl_batch(const Schedule& sched, const ScoreModel& model, const Eigen::MatrixXd& points,
                                  const DeltaGrid& grid, const TraceMode& mode, int rk_steps = 16,
                                  const Execution& exec = {});

/// log p(x, t0) from the probability-flow ODE: integrate from t0 to 1 with
/// fixed-step RK4 (uniform in log t), accumulating the divergence of the
/// velocity with exact traces, then add the Gaussian reference log density.
double log_density(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x, double t0,
                   int rk_steps = 500);

}  // namespace lid
