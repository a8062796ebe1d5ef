#pragma once

#include <memory>

#include <Eigen/Core>

#include "lid/mlp_score.hpp"
#include "lid/schedule.hpp"
#include "lid/score_model.hpp"

namespace lid {

/// Discrete-time noise predictor eps(x, n) with n in {1, ..., T}.
class EpsilonNetwork {
public:
    virtual ~EpsilonNetwork() = default;
    virtual Eigen::Index dim() const = 0;
    virtual Eigen::MatrixXd eps_batch(const Eigen::MatrixXd& points, int step) const = 0;
    /// eps(x, step) and its Jacobian applied to each column of `directions`.
    virtual ScoreWithJvp eps_with_jvp(const Eigen::VectorXd& x, int step, const Eigen::MatrixXd& directions) const = 0;
};

/// Noise predictor backed by an MLP whose raw output is read as eps; the
/// network sees the continuous time step / total_steps.
class MlpEpsilonNetwork final : public EpsilonNetwork {
public:
    MlpEpsilonNetwork(MlpScore net, int total_steps);

    Eigen::Index dim() const override { return net_.dim(); }
    Eigen::MatrixXd eps_batch(const Eigen::MatrixXd& points, int step) const override;
    ScoreWithJvp eps_with_jvp(const Eigen::VectorXd& x, int step, const Eigen::MatrixXd& directions) const override;

private:
    double time_of(int step) const;

    MlpScore net_;
    int total_steps_;
};

/// Score view of a DDPM noise predictor: s(x, t) = -eps(x, round(t T)) / sigma(t).
class EpsilonAdapter final : public ScoreModel {
public:
    EpsilonAdapter(std::shared_ptr<const EpsilonNetwork> net, Schedule sched, int total_steps);

    Eigen::Index dim() const override { return net_->dim(); }
    int step_of(double t) const;

    Eigen::MatrixXd score_batch(const Eigen::MatrixXd& points, double t) const override;
    ScoreWithJvp score_with_jvp(const Eigen::VectorXd& x, double t, const Eigen::MatrixXd& directions) const override;

private:
    std::shared_ptr<const EpsilonNetwork> net_;
    Schedule sched_;
    int total_steps_;
};

/// FLIPD written directly in DDPM terms:
/// D - sqrt(1 - abar) tr(grad eps(sqrt(abar) x, n)) + ||eps(sqrt(abar) x, n)||^2,
/// with abar = psi^2(n / T) and an exact trace.
double flipd_ddpm(const EpsilonNetwork& net, const Schedule& sched, int total_steps, const Eigen::VectorXd& x,
                  int step);

}  // namespace lid
