#include "lid/nb.hpp"

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "lid/errors.hpp"
#include "lid/kneedle.hpp"
#include "lid/rng.hpp"

namespace lid {

std::string to_string(NbThreshold mode) { return mode == NbThreshold::MaxGap ? "max_gap" : "kneedle"; }

NbThreshold nb_threshold_from_string(const std::string& name)
{
    if (name == "max_gap") return NbThreshold::MaxGap;
    if (name == "kneedle") return NbThreshold::Kneedle;
    throw ValidationError("unknown NB threshold mode '" + name + "'");
}

void NbConfig::validate() const
{
    if (!(t0 >= kTimeFloor && t0 <= 1.0)) throw ValidationError("NB t0 outside [t_min, 1]");
    if (columns < 0) throw ValidationError("NB column count K must be >= 1");
    if (num_tau < 5) throw ValidationError("NB threshold sweep needs at least 5 values");
    if (!(tau_min > 0.0 && tau_max > tau_min)) throw ValidationError("NB needs 0 < tau_min < tau_max");
    if (!(sensitivity > 0.0)) throw ValidationError("kneedle sensitivity must be positive");
}

int rank_max_gap(const Eigen::VectorXd& sv)
{
    const Eigen::Index m = sv.size();
    if (m == 0 || sv[0] <= 0.0) return 0;
    if (m == 1) return 1;
    Eigen::Index best = 0;
    double best_gap = -1.0;
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        const double gap = sv[i] - sv[i + 1];
        if (gap > best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    return static_cast<int>(best + 1);
}

int rank_kneedle(const Eigen::VectorXd& sv, int num_tau, double tau_min, double tau_max, double sensitivity)
{
    std::vector<double> log_tau(static_cast<std::size_t>(num_tau));
    std::vector<double> rank(static_cast<std::size_t>(num_tau));
    const double lo = std::log(tau_min);
    const double hi = std::log(tau_max);
    for (int j = 0; j < num_tau; ++j) {
        const double lt = lo + (hi - lo) * j / (num_tau - 1.0);
        const double tau = std::exp(lt);
        log_tau[static_cast<std::size_t>(j)] = lt;
        rank[static_cast<std::size_t>(j)] = static_cast<double>((sv.array() > tau).count());
    }
    const auto knee = kneedle(log_tau, rank, sensitivity, KneeShape::ConvexDecreasing);
    if (!knee) return rank_max_gap(sv);
    return static_cast<int>(rank[knee->index]);
}

NbResult nb_estimate(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x, const NbConfig& cfg,
                     std::uint64_t stream)
{
    cfg.validate();
    const Eigen::Index d = model.dim();
    if (x.size() != d) throw ValidationError("query dimension does not match the model");
    const int k = cfg.resolved_columns(d);

    auto rng = make_rng(cfg.seed, {0x4e42, stream});
    const Eigen::MatrixXd noise = standard_normal(d, k, rng);
    const Eigen::MatrixXd noised = (sched.sigma(cfg.t0) * noise).colwise() + sched.psi(cfg.t0) * x;
    const Eigen::MatrixXd scores = model.score_batch(noised, cfg.t0);
    if (!scores.allFinite()) throw NumericError("non-finite score in the NB score matrix");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(scores);
    if (svd.info() != Eigen::Success) throw NumericError("SVD of the NB score matrix failed");

    NbResult r;
    r.singular_values = svd.singularValues();
    r.rank = cfg.threshold == NbThreshold::MaxGap
                 ? rank_max_gap(r.singular_values)
                 : rank_kneedle(r.singular_values, cfg.num_tau, cfg.tau_min, cfg.tau_max, cfg.sensitivity);
    r.lid = static_cast<double>(d - r.rank);
    return r;
}

std::vector<LidRecord> nb_batch(const Schedule& sched, const ScoreModel& model, const Eigen::MatrixXd& points,
                                const NbConfig& cfg, const Execution& exec)
{
    cfg.validate();
    const double k = cfg.resolved_columns(model.dim());
    return map_points(points.cols(), exec, [&](Eigen::Index i) {
        const auto res = nb_estimate(sched, model, points.col(i), cfg, static_cast<std::uint64_t>(i));
        LidRecord r;
        r.index = i;
        r.lid = res.lid;
        r.t0 = cfg.t0;
        r.extra = {{"rank", static_cast<double>(res.rank)}, {"K", k}};
        return r;
    });
}

}  // namespace lid
