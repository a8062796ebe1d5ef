#include "lid/score_model.hpp"

#include <cmath>
#include <sstream>

#include "lid/errors.hpp"
#include "lid/rng.hpp"

namespace lid {

void ScoreModel::check_query(Eigen::Index rows, double t) const
{
    if (rows != dim()) {
        std::ostringstream os;
        os << "dimension mismatch: model expects " << dim() << ", got " << rows;
        throw ValidationError(os.str());
    }
    if (!(t >= kTimeFloor && t <= 1.0)) {
        std::ostringstream os;
        os << "score evaluated at t = " << t << ", below the floor " << kTimeFloor << " or above 1";
        throw ValidationError(os.str());
    }
}

Eigen::VectorXd score(const ScoreModel& model, const Eigen::VectorXd& x, double t)
{
    return model.score_batch(x, t).col(0);
}

Eigen::VectorXd score_jvp(const ScoreModel& model, const Eigen::VectorXd& x, double t,
                          const Eigen::VectorXd& v)
{
    if (v.size() != x.size()) throw ValidationError("direction and point dimensions differ");
    return model.score_with_jvp(x, t, v).jvp.col(0);
}

double trace_jacobian_exact(const ScoreModel& model, const Eigen::VectorXd& x, double t)
{
    const Eigen::Index d = model.dim();
    const auto out = model.score_with_jvp(x, t, Eigen::MatrixXd::Identity(d, d));
    return out.jvp.trace();
}

double reference_variance(const Schedule& sched)
{
    return sched.kind() == ScheduleKind::VE ? sched.sigma2(1.0) : 1.0;
}

Eigen::MatrixXd sample_backward(const ScoreModel& model, const Schedule& sched, Eigen::Index n,
                                int steps, std::uint64_t seed, double t_end)
{
    if (steps < 100) throw ValidationError("sample_backward needs at least 100 steps");
    if (n < 1) throw ValidationError("sample count must be positive");
    if (!(t_end >= kTimeFloor && t_end < 1.0)) throw ValidationError("t_end must lie in [t_min, 1)");

    auto rng = make_rng(seed, {0x5a3b});
    const Eigen::Index d = model.dim();
    Eigen::MatrixXd y = standard_normal(d, n, rng) * std::sqrt(reference_variance(sched));

    const double h = (1.0 - t_end) / steps;
    for (int k = 0; k < steps; ++k) {
        const double t = 1.0 - k * h;
        const auto [drift, g2] = sched.drift_diffusion(t);
        const Eigen::MatrixXd s = model.score_batch(y, t);
        y += (g2 * s - drift * y) * h + std::sqrt(g2 * h) * standard_normal(d, n, rng);
        if (!y.allFinite()) {
            std::ostringstream os;
            os << "backward SDE state became non-finite at step " << k << " (t = " << t << ")";
            throw NumericError(os.str());
        }
    }
    return y;
}

}  // namespace lid
