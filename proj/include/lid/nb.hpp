#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "lid/parallel.hpp"
#include "lid/record.hpp"
#include "lid/schedule.hpp"
#include "lid/score_model.hpp"

namespace lid {

enum class NbThreshold { MaxGap, Kneedle };

std::string to_string(NbThreshold mode);
NbThreshold nb_threshold_from_string(const std::string& name);

struct NbConfig {
    double t0 = 0.01;
    /// Number of noised copies per query; 0 means 4 D.
    int columns = 0;
    NbThreshold threshold = NbThreshold::MaxGap;
    int num_tau = 100;
    double tau_min = 1e-3;
    double tau_max = 1000.0;
    double sensitivity = 1.0;
    std::uint64_t seed = 0;

    int resolved_columns(Eigen::Index ambient) const { return columns > 0 ? columns : static_cast<int>(4 * ambient); }
    void validate() const;
};

/// Rank = position of the largest drop between consecutive singular values
/// s_1 >= ... >= s_m (so 1..m); 0 when every singular value is zero.
int rank_max_gap(const Eigen::VectorXd& singular_values);

/// Sweeps geometric thresholds tau, counts singular values above each, and
/// returns the count at the start of the plateau found by kneedle on the
/// decreasing count-vs-log(tau) curve. Falls back to max-gap when the curve
/// has no knee.
int rank_kneedle(const Eigen::VectorXd& singular_values, int num_tau, double tau_min, double tau_max,
                 double sensitivity);

struct NbResult {
    double lid;
    int rank;
    Eigen::VectorXd singular_values;
};

/// D minus the rank of the D x K matrix of scores at K points drawn from the
/// transition kernel around x at time t0. Copies for query i come from the
/// stream (seed, i).
NbResult nb_estimate(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x, const NbConfig& cfg,
                     std::uint64_t stream = 0);

std::vector<LidRecord> nb_batch(const Schedule& sched, const ScoreModel& model, const Eigen::MatrixXd& points,
                                const NbConfig& cfg, const Execution& exec = {});

}  // namespace lid
