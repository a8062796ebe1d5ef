#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "lid/schedule.hpp"

namespace lid {

struct ScoreWithJvp {
    Eigen::VectorXd score;
    /// Column j is (grad_x s(x, t)) * directions.col(j).
    Eigen::MatrixXd jvp;
};

/// Anything that approximates the score grad_x log p(x, t) of a diffusion
/// process and can push tangent vectors through it.
///
/// Implementations are immutable after construction and safe to evaluate
/// concurrently.
class ScoreModel {
public:
    virtual ~ScoreModel() = default;

    virtual Eigen::Index dim() const = 0;

    /// Scores of every column of `points` at a common time `t`.
    virtual Eigen::MatrixXd score_batch(const Eigen::MatrixXd& points, double t) const = 0;

    /// Score at `x` together with Jacobian-vector products for each column of
    /// `directions` (forward mode, one pass).
    virtual ScoreWithJvp score_with_jvp(const Eigen::VectorXd& x, double t,
                                        const Eigen::MatrixXd& directions) const = 0;

protected:
    /// Throws ValidationError on a dimension mismatch or t below kTimeFloor.
    void check_query(Eigen::Index rows, double t) const;
};

Eigen::VectorXd score(const ScoreModel& model, const Eigen::VectorXd& x, double t);
Eigen::VectorXd score_jvp(const ScoreModel& model, const Eigen::VectorXd& x, double t,
                          const Eigen::VectorXd& v);

/// tr(grad_x s(x, t)) from D Jacobian-vector products against the standard basis.
double trace_jacobian_exact(const ScoreModel& model, const Eigen::VectorXd& x, double t);

/// Euler-Maruyama integration of the approximate backward SDE from the
/// Gaussian reference at t = 1 down to `t_end`. Columns of the result are samples.
Eigen::MatrixXd sample_backward(const ScoreModel& model, const Schedule& sched, Eigen::Index n,
                                int steps, std::uint64_t seed, double t_end = 1e-3);

/// Gaussian reference used for p(., 1): N(0, I) for VP / SubVP, N(0, sigma^2(1) I) for VE.
double reference_variance(const Schedule& sched);

}  // namespace lid
