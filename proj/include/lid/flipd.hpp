#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lid/kneedle.hpp"
#include "lid/parallel.hpp"
#include "lid/record.hpp"
#include "lid/schedule.hpp"
#include "lid/score_model.hpp"

namespace lid {

enum class ProbeNoise { Rademacher, Gaussian };

std::string to_string(ProbeNoise noise);
ProbeNoise probe_noise_from_string(const std::string& name);

/// tr(grad s) from D Jacobian-vector products against the standard basis.
struct ExactTrace {
    bool operator==(const ExactTrace&) const = default;
};

/// tr(grad s) ~ (1/k) sum_j e_j^T (grad s) e_j with isotropic probes e_j.
/// Probes for query point i come from the stream (seed, i) and are reused for
/// every time at that point.
struct HutchinsonTrace {
    int samples = 50;
    ProbeNoise noise = ProbeNoise::Rademacher;
    std::uint64_t seed = 0;

    bool operator==(const HutchinsonTrace&) const = default;
};

using TraceMode = std::variant<ExactTrace, HutchinsonTrace>;

/// Exact up to D = 100, Hutchinson with 50 Rademacher probes above.
TraceMode default_trace_mode(Eigen::Index ambient, std::uint64_t seed = 0);
std::string describe(const TraceMode& mode);
void validate(const TraceMode& mode);

Eigen::MatrixXd hutchinson_probes(Eigen::Index dim, const HutchinsonTrace& mode, std::uint64_t stream);

/// Trace of the score Jacobian at (y, t) under `mode`; also returns the score.
double score_jacobian_trace(const ScoreModel& model, const Eigen::VectorXd& y, double t, const TraceMode& mode,
                            std::uint64_t stream, Eigen::VectorXd* score_out = nullptr);

/// Rate of change of the log convolved density,
/// sigma^2(t) (tr grad s + ||s||^2) evaluated at psi(t) x.
double nu(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x, double t,
          const TraceMode& mode = ExactTrace{}, std::uint64_t stream = 0);

/// D + nu(t0). Not clamped: negative values are returned as computed.
double flipd(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x, double t0,
             const TraceMode& mode = ExactTrace{}, std::uint64_t stream = 0);

struct LidCurve {
    std::vector<double> t_grid;
    std::vector<double> values;
};

/// t_i = i / (count + 1) for i = 1..count.
std::vector<double> uniform_time_grid(int count = 50);

LidCurve flipd_curve(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x,
                     const std::vector<double>& t_grid, const TraceMode& mode = ExactTrace{},
                     std::uint64_t stream = 0);

struct AutoConfig {
    std::vector<double> t_grid = uniform_time_grid(50);
    double sensitivity = 1.0;
    KneeShape shape = KneeShape::ConvexDecreasing;
    /// Used when the curve has no knee.
    double fallback_t0 = 0.05;

    void validate() const;
};

struct AutoResult {
    double lid;
    double t0;
    bool fallback;
    LidCurve curve;
};

AutoResult flipd_auto(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x,
                      const TraceMode& mode = ExactTrace{}, const AutoConfig& cfg = {}, std::uint64_t stream = 0);

/// Batch forms over the columns of `points`. Point i uses Hutchinson stream i,
/// so results do not depend on the execution order.
std::vector<LidRecord> flipd_batch(const Schedule& sched, const ScoreModel& model, const Eigen::MatrixXd& points,
                                   double t0, const TraceMode& mode, const Execution& exec = {});
std::vector<LidRecord> flipd_auto_batch(const Schedule& sched, const ScoreModel& model,
                                        const Eigen::MatrixXd& points, const TraceMode& mode,
                                        const AutoConfig& cfg = {}, const Execution& exec = {});

}  // namespace lid
