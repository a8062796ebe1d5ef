#include "lid/lidl_ode.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lid/errors.hpp"

namespace lid {

DeltaGrid DeltaGrid::standard()
{
    return from_scales({0.01, 0.014, 0.019, 0.027, 0.037, 0.052, 0.072, 0.1});
}

DeltaGrid DeltaGrid::linear(double lo, double hi, int m)
{
    if (m < 1) throw ValidationError("delta grid needs at least one point");
    DeltaGrid grid;
    grid.deltas.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        grid.deltas[static_cast<std::size_t>(i)] = m == 1 ? lo : lo + (hi - lo) * i / (m - 1.0);
    return grid;
}

DeltaGrid DeltaGrid::from_scales(const std::vector<double>& std_devs)
{
    DeltaGrid grid;
    for (double s : std_devs) {
        if (!(s > 0.0)) throw ValidationError("delta grid scales must be positive");
        grid.deltas.push_back(std::log(s));
    }
    return grid;
}

void DeltaGrid::validate(const Schedule& sched) const
{
    if (deltas.empty()) throw ValidationError("delta grid is empty");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (i > 0 && !(deltas[i] > deltas[i - 1])) throw ValidationError("delta grid must be strictly increasing");
        if (!(deltas[i] >= sched.delta_lower() && deltas[i] <= sched.delta_upper())) {
            std::ostringstream os;
            os << "delta " << deltas[i] << " outside the schedule range [" << sched.delta_lower() << ", "
               << sched.delta_upper() << "]";
            throw ValidationError(os.str());
        }
    }
    if (sched.t_of_delta(deltas.front()) < kTimeFloor)
        throw ValidationError("smallest delta maps below the minimum diffusion time");
}

std::string DeltaGrid::describe() const
{
    std::ostringstream os;
    os << "delta[" << deltas.size() << "]";
    if (!deltas.empty()) os << "=" << deltas.front() << ".." << deltas.back();
    return os.str();
}

std::vector<double> log_rho_trajectory(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x,
                                       const DeltaGrid& grid, const TraceMode& mode, int rk_steps,
                                       std::uint64_t stream)
{
    grid.validate(sched);
    if (rk_steps < 8) throw ValidationError("rk_steps must be >= 8 per interval");

    auto rate = [&](double delta) {
        try {
            return nu(sched, model, x, sched.t_of_delta(delta), mode, stream);
        } catch (const NumericError& e) {
            std::ostringstream os;
            os << "log rho trajectory at delta = " << delta << ": " << e.what();
            throw NumericError(os.str());
        }
    };

    // The right-hand side does not depend on the state, so the two RK4
    // midpoint stages coincide and each step needs two new evaluations.
    std::vector<double> out(grid.deltas.size(), 0.0);
    double value = 0.0;
    double f_left = rate(grid.deltas.front());
    for (std::size_t i = 1; i < grid.deltas.size(); ++i) {
        const double a = grid.deltas[i - 1];
        const double h = (grid.deltas[i] - a) / rk_steps;
        for (int k = 0; k < rk_steps; ++k) {
            const double left = a + k * h;
            const double f_mid = rate(left + 0.5 * h);
            const double f_right = rate(k + 1 == rk_steps ? grid.deltas[i] : left + h);
            value += h / 6.0 * (f_left + 4.0 * f_mid + f_right);
            f_left = f_right;
        }
        out[i] = value;
    }
    return out;
}

double regression_slope(const std::vector<double>& xs, const std::vector<double>& ys)
{
    if (xs.size() != ys.size()) throw ValidationError("regression inputs differ in length");
    if (xs.size() < 2) throw ValidationError("regression needs at least two points");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw ValidationError("degenerate regression: all abscissae equal");
    return sxy / sxx;
}

LidlResult lidl_estimate(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x,
                         const DeltaGrid& grid, const TraceMode& mode, int rk_steps, std::uint64_t stream)
{
    if (grid.deltas.size() < 2) throw ValidationError("LIDL needs at least two deltas");
    LidlResult r;
    r.trajectory = log_rho_trajectory(sched, model, x, grid, mode, rk_steps, stream);
    r.slope = regression_slope(grid.deltas, r.trajectory);
    r.lid = static_cast<double>(model.dim()) + r.slope;
    return r;
}

std::vector<LidRecord> lidl_batch(const Schedule& sched, const ScoreModel& model, const Eigen::MatrixXd& points,
                                  const DeltaGrid& grid, const TraceMode& mode, int rk_steps, const Execution& exec)
{
    grid.validate(sched);
    validate(mode);
    const std::string label = describe(mode);
    return map_points(points.cols(), exec, [&](Eigen::Index i) {
        const auto res = lidl_estimate(sched, model, points.col(i), grid, mode, rk_steps, static_cast<std::uint64_t>(i));
        LidRecord r;
        r.index = i;
        r.lid = res.lid;
        r.trace_mode = label;
        r.extra = {{"slope", res.slope}};
        return r;
    });
}

double log_density(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x, double t0,
                   int rk_steps)
{
    const Eigen::Index d = model.dim();
    if (x.size() != d) throw ValidationError("query dimension does not match the model");
    if (!(t0 >= kTimeFloor && t0 < 1.0)) throw ValidationError("log_density needs t0 in [t_min, 1)");
    if (rk_steps < 1) throw ValidationError("rk_steps must be positive");

    // State [y; accumulated divergence], integrated in u = log t so the
    // steps are finer where the score changes fastest.
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    auto rhs = [&](double u, const Eigen::VectorXd& state) {
        const double t = std::exp(u);
        const auto [b, g2] = sched.drift_diffusion(t);
        const Eigen::VectorXd y = state.head(d);
        const auto out = model.score_with_jvp(y, t, eye);
        Eigen::VectorXd dz(d + 1);
        dz.head(d) = t * (b * y - 0.5 * g2 * out.score);
        dz[d] = t * (static_cast<double>(d) * b - 0.5 * g2 * out.jvp.trace());
        return dz;
    };

    Eigen::VectorXd state(d + 1);
    state.head(d) = x;
    state[d] = 0.0;
    const double u0 = std::log(t0);
    const double h = -u0 / rk_steps;
    for (int k = 0; k < rk_steps; ++k) {
        const double u = u0 + k * h;
        const Eigen::VectorXd k1 = rhs(u, state);
        const Eigen::VectorXd k2 = rhs(u + 0.5 * h, state + 0.5 * h * k1);
        const Eigen::VectorXd k3 = rhs(u + 0.5 * h, state + 0.5 * h * k2);
        const Eigen::VectorXd k4 = rhs(k + 1 == rk_steps ? 0.0 : u + h, state + h * k3);
        state += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!state.allFinite()) {
            std::ostringstream os;
            os << "probability-flow trajectory blew up near t = " << std::exp(u + h);
            throw NumericError(os.str());
        }
    }

    const double var = reference_variance(sched);
    const double log_ref = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * var) -
                           0.5 * state.head(d).squaredNorm() / var;
    return log_ref + state[d];
}

}  // namespace lid
