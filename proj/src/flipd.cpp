#include "lid/flipd.hpp"

#include <cmath>
#include <sstream>

#include "lid/errors.hpp"
#include "lid/rng.hpp"

namespace lid {

std::string to_string(ProbeNoise noise) { return noise == ProbeNoise::Rademacher ? "rademacher" : "gaussian"; }

ProbeNoise probe_noise_from_string(const std::string& name)
{
    if (name == "rademacher") return ProbeNoise::Rademacher;
    if (name == "gaussian") return ProbeNoise::Gaussian;
    throw ValidationError("unknown probe noise '" + name + "'");
}

TraceMode default_trace_mode(Eigen::Index ambient, std::uint64_t seed)
{
    if (ambient <= 100) return ExactTrace{};
    return HutchinsonTrace{50, ProbeNoise::Rademacher, seed};
}

std::string describe(const TraceMode& mode)
{
    if (std::holds_alternative<ExactTrace>(mode)) return "exact";
    const auto& h = std::get<HutchinsonTrace>(mode);
    std::ostringstream os;
    os << "hutchinson(k=" << h.samples << "," << to_string(h.noise) << ")";
    return os.str();
}

void validate(const TraceMode& mode)
{
    if (const auto* h = std::get_if<HutchinsonTrace>(&mode); h && h->samples < 1)
        throw ValidationError("Hutchinson sample count must be >= 1");
}

Eigen::MatrixXd hutchinson_probes(Eigen::Index dim, const HutchinsonTrace& mode, std::uint64_t stream)
{
    auto rng = make_rng(mode.seed, {0x4875, stream});
    return mode.noise == ProbeNoise::Rademacher ? rademacher(dim, mode.samples, rng)
                                                : standard_normal(dim, mode.samples, rng);
}

double score_jacobian_trace(const ScoreModel& model, const Eigen::VectorXd& y, double t, const TraceMode& mode,
                            std::uint64_t stream, Eigen::VectorXd* score_out)
{
    validate(mode);
    const Eigen::Index d = model.dim();
    double trace = 0.0;
    if (std::holds_alternative<ExactTrace>(mode)) {
        auto out = model.score_with_jvp(y, t, Eigen::MatrixXd::Identity(d, d));
        trace = out.jvp.trace();
        if (score_out) *score_out = std::move(out.score);
    } else {
        const auto& h = std::get<HutchinsonTrace>(mode);
        const Eigen::MatrixXd probes = hutchinson_probes(d, h, stream);
        auto out = model.score_with_jvp(y, t, probes);
        trace = probes.cwiseProduct(out.jvp).sum() / static_cast<double>(h.samples);
        if (score_out) *score_out = std::move(out.score);
    }
    return trace;
}

double nu(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x, double t, const TraceMode& mode,
          std::uint64_t stream)
{
    if (x.size() != model.dim()) throw ValidationError("query dimension does not match the model");
    Eigen::VectorXd s;
    const double trace = score_jacobian_trace(model, sched.psi(t) * x, t, mode, stream, &s);
    const double value = sched.sigma2(t) * (trace + s.squaredNorm());
    if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "non-finite score evaluation at t = " << t;
        throw NumericError(os.str());
    }
    return value;
}

double flipd(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x, double t0,
             const TraceMode& mode, std::uint64_t stream)
{
    return static_cast<double>(model.dim()) + nu(sched, model, x, t0, mode, stream);
}

std::vector<double> uniform_time_grid(int count)
{
    if (count < 1) throw ValidationError("time grid needs at least one point");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = (i + 1.0) / (count + 1.0);
    return grid;
}

namespace {

void check_grid(const std::vector<double>& grid)
{
    if (grid.empty()) throw ValidationError("time grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= kTimeFloor && grid[i] < 1.0)) throw ValidationError("time grid must lie inside [t_min, 1)");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ValidationError("time grid must be strictly increasing");
    }
}

}  // namespace

LidCurve flipd_curve(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x,
                     const std::vector<double>& t_grid, const TraceMode& mode, std::uint64_t stream)
{
    check_grid(t_grid);
    LidCurve curve{t_grid, std::vector<double>(t_grid.size())};
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        try {
            curve.values[i] = flipd(sched, model, x, t_grid[i], mode, stream);
        } catch (const NumericError& e) {
            std::ostringstream os;
            os << "FLIPD curve grid index " << i << ": " << e.what();
            throw NumericError(os.str());
        }
    }
    return curve;
}

void AutoConfig::validate() const
{
    check_grid(t_grid);
    if (t_grid.size() < 5) throw ValidationError("automatic t0 selection needs at least 5 grid points");
    if (!(sensitivity > 0.0)) throw ValidationError("kneedle sensitivity must be positive");
    if (!(fallback_t0 >= kTimeFloor && fallback_t0 <= 1.0)) throw ValidationError("fallback t0 outside [t_min, 1]");
}

AutoResult flipd_auto(const Schedule& sched, const ScoreModel& model, const Eigen::VectorXd& x,
                      const TraceMode& mode, const AutoConfig& cfg, std::uint64_t stream)
{
    cfg.validate();
    AutoResult result{0.0, 0.0, false, flipd_curve(sched, model, x, cfg.t_grid, mode, stream)};
    const auto knee = kneedle(result.curve.t_grid, result.curve.values, cfg.sensitivity, cfg.shape);
    if (knee) {
        result.t0 = knee->x;
        result.lid = result.curve.values[knee->index];
    } else {
        result.fallback = true;
        result.t0 = cfg.fallback_t0;
        result.lid = flipd(sched, model, x, cfg.fallback_t0, mode, stream);
    }
    return result;
}

std::vector<LidRecord> flipd_batch(const Schedule& sched, const ScoreModel& model, const Eigen::MatrixXd& points,
                                   double t0, const TraceMode& mode, const Execution& exec)
{
    validate(mode);
    const std::string label = describe(mode);
    return map_points(points.cols(), exec, [&](Eigen::Index i) {
        LidRecord r;
        r.index = i;
        r.t0 = t0;
        r.trace_mode = label;
        r.lid = flipd(sched, model, points.col(i), t0, mode, static_cast<std::uint64_t>(i));
        return r;
    });
}

std::vector<LidRecord> flipd_auto_batch(const Schedule& sched, const ScoreModel& model,
                                        const Eigen::MatrixXd& points, const TraceMode& mode, const AutoConfig& cfg,
                                        const Execution& exec)
{
    validate(mode);
    cfg.validate();
    const std::string label = describe(mode);
    return map_points(points.cols(), exec, [&](Eigen::Index i) {
        const auto res = flipd_auto(sched, model, points.col(i), mode, cfg, static_cast<std::uint64_t>(i));
        LidRecord r;
        r.index = i;
        r.lid = res.lid;
        r.t0 = res.t0;
        r.trace_mode = label;
        r.fallback = res.fallback;
        return r;
    });
}

}  // namespace lid
