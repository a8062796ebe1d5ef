#include "lid/epsilon_adapter.hpp"

#include <algorithm>
#include <cmath>

#include "lid/errors.hpp"

namespace lid {

MlpEpsilonNetwork::MlpEpsilonNetwork(MlpScore net, int total_steps) : net_(std::move(net)), total_steps_(total_steps)
{
    if (total_steps < 1) throw ValidationError("total_steps must be positive");
    if (net_.architecture().output != OutputParam::Score)
        throw ValidationError("MlpEpsilonNetwork needs an MLP with raw (Score) output");
}

double MlpEpsilonNetwork::time_of(int step) const
{
    if (step < 1 || step > total_steps_) throw ValidationError("DDPM step outside [1, T]");
    return static_cast<double>(step) / total_steps_;
}

Eigen::MatrixXd MlpEpsilonNetwork::eps_batch(const Eigen::MatrixXd& points, int step) const
{
    return net_.score_batch(points, time_of(step));
}

ScoreWithJvp MlpEpsilonNetwork::eps_with_jvp(const Eigen::VectorXd& x, int step, const Eigen::MatrixXd& directions) const
{
    return net_.score_with_jvp(x, time_of(step), directions);
}

EpsilonAdapter::EpsilonAdapter(std::shared_ptr<const EpsilonNetwork> net, Schedule sched, int total_steps)
    : net_(std::move(net)), sched_(sched), total_steps_(total_steps)
{
    if (!net_) throw ValidationError("EpsilonAdapter needs a network");
    if (total_steps < 1) throw ValidationError("total_steps must be positive");
}

int EpsilonAdapter::step_of(double t) const
{
    return std::max(1, static_cast<int>(std::lround(t * total_steps_)));
}

Eigen::MatrixXd EpsilonAdapter::score_batch(const Eigen::MatrixXd& points, double t) const
{
    check_query(points.rows(), t);
    return net_->eps_batch(points, step_of(t)) / -sched_.sigma(t);
}

ScoreWithJvp EpsilonAdapter::score_with_jvp(const Eigen::VectorXd& x, double t, const Eigen::MatrixXd& directions) const
{
    check_query(x.size(), t);
    auto out = net_->eps_with_jvp(x, step_of(t), directions);
    const double scale = -1.0 / sched_.sigma(t);
    out.score *= scale;
    out.jvp *= scale;
    return out;
}

double flipd_ddpm(const EpsilonNetwork& net, const Schedule& sched, int total_steps, const Eigen::VectorXd& x,
                  int step)
{
    if (step < 1 || step > total_steps) throw ValidationError("DDPM step outside [1, T]");
    const double t = static_cast<double>(step) / total_steps;
    const double abar = std::pow(sched.psi(t), 2);
    const Eigen::Index d = net.dim();
    const auto out = net.eps_with_jvp(std::sqrt(abar) * x, step, Eigen::MatrixXd::Identity(d, d));
    return static_cast<double>(d) - std::sqrt(1.0 - abar) * out.jvp.trace() + out.score.squaredNorm();
}

}  // namespace lid
