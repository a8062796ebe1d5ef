// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance [work_dir] [--only N[,M...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "lid/config.hpp"
#include "lid/flipd.hpp"
#include "lid/gaussian_oracle.hpp"
#include "lid/io.hpp"
#include "lid/lidl_ode.hpp"
#include "lid/metrics.hpp"
#include "lid/mlp_score.hpp"
#include "lid/nb.hpp"
#include "lid/pipeline.hpp"
#include "lid/rng.hpp"
#include "lid/train.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace lid;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

fs::path g_work_dir = "acceptance_runs";

// ---------------------------------------------------------------------------
// Shared trained runs.

/// Desk-scale training setup shared by every trained criterion: the small
/// bottleneck MLP with uniform (noise-space) loss weighting.
ExperimentConfig desk_config(std::uint64_t seed)
{
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.dataset.size = 100000;
    cfg.model.hidden = {128, 64, 128};
    cfg.model.time_embed_dim = 32;
    cfg.train.epochs = 300;
    cfg.train.lr = 2e-3;
    cfg.train.warmup_steps = 500;
    cfg.train.weighting = Weighting::Uniform;
    return cfg;
}

ExperimentConfig mixture_config()
{
    auto cfg = desk_config(7);
    cfg.dataset.ambient_dim = 10;
    cfg.dataset.components = {{BaseDistribution::Gaussian, 2, 1.0},
                              {BaseDistribution::Gaussian, 4, 1.0},
                              {BaseDistribution::Gaussian, 8, 1.0}};
    // About 22 minutes on one core; longer training keeps shrinking the share of
    // 8-dimensional points whose curves never flatten.
    cfg.train.epochs = 900;
    return cfg;
}

/// Generates and trains once per process; later callers reuse the run.
fs::path trained_run(const std::string& name, const ExperimentConfig& cfg)
{
    static std::set<std::string> done;
    const fs::path dir = g_work_dir / name;
    if (done.count(name)) return dir;
    fs::create_directories(dir);
    RunOptions opts;
    opts.out_dir = dir;
    opts.force = true;
    cmd_generate(cfg, opts);
    const auto start = std::chrono::steady_clock::now();
    cmd_train(cfg, opts);
    std::cout << "    (" << name << ": trained in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s)\n";
    done.insert(name);
    return dir;
}

ResultTable estimate(const ExperimentConfig& cfg, const fs::path& dir, const std::string& estimator)
{
    RunOptions opts;
    opts.out_dir = dir;
    opts.force = true;
    cmd_estimate(cfg, opts, estimator);
    return parse_results_csv(read_file(dir / artifact::results(estimator)));
}

void split(const ResultTable& t, std::vector<double>& est, std::vector<double>& lab)
{
    for (const auto& r : t.rows) {
        est.push_back(r.lid);
        lab.push_back(r.label);
    }
}

// ---------------------------------------------------------------------------
// 1. Oracle small-scale limit.

Outcome oracle_limit()
{
    Outcome o;
    const auto vp = Schedule::vp();
    const double t0 = vp.t_of_delta(std::log(0.01));
    const auto grid = DeltaGrid::linear(std::log(0.01), std::log(0.02), 8);
    double worst_flipd = 0.0, worst_lidl = 0.0;
    for (int d : {1, 2, 5, 9}) {
        const auto oracle = GaussianOracle::affine(10, d, vp, 1000 + d);
        auto rng = make_rng(2000 + d);
        for (int rep = 0; rep < 5; ++rep) {
            const Eigen::VectorXd x = oracle.point_on_support(standard_normal(d, rng));
            worst_flipd = std::max(worst_flipd, std::abs(flipd(vp, oracle, x, t0) - d));
            worst_lidl = std::max(worst_lidl, std::abs(lidl_estimate(vp, oracle, x, grid).lid - d));
        }
    }
    o.detail << "max |FLIPD - d| = " << worst_flipd << " (tol 0.05), max |LIDL - d| = " << worst_lidl << " (tol 0.1)";
    o.require(worst_flipd <= 0.05, "FLIPD");
    o.require(worst_lidl <= 0.1, "LIDL slope");
    return o;
}

// ---------------------------------------------------------------------------
// 2. Multiscale oracle.

Outcome multiscale_oracle()
{
    Outcome o;
    const auto vp = Schedule::vp(0.1, 20.1);
    Eigen::VectorXd ev(10);
    ev << 1e-4, 1e-4, 1e-4, 1, 1, 1, 1e3, 1e3, 1e3, 1e3;
    const auto oracle = GaussianOracle::random_rotation(ev, vp, 3, 0.0);
    const Eigen::VectorXd x = oracle.mean();
    double worst = 0.0;
    for (double t : {0.01, 0.02, 0.03, 0.05}) worst = std::max(worst, std::abs(flipd(vp, oracle, x, t) - 7.0));
    const double at06 = flipd(vp, oracle, x, 0.6);
    o.detail << "plateau max |FLIPD - 7| over t in [0.01, 0.05] = " << worst << " (tol 0.2), FLIPD(0.6) = " << at06
             << " (4 +- 0.3)";
    o.require(worst <= 0.2, "plateau");
    o.require(std::abs(at06 - 4.0) <= 0.3, "second plateau");
    return o;
}

// ---------------------------------------------------------------------------
// 3. Schedule identities and the convolution identity.

Outcome schedule_identities()
{
    Outcome o;
    const std::vector<Schedule> families{Schedule::vp(), Schedule::sub_vp(), Schedule::ve()};
    const double h = 1e-5;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    double worst_kernel = 0.0, worst_lambda = 0.0;
    for (const auto& s : families) {
        for (int i = 1; i <= 200; ++i) {
            const double t = i / 201.0;
            const auto [b, g2] = s.drift_diffusion(t);
            const double dpsi = (s.psi(t + h) - s.psi(t - h)) / (2 * h);
            const double dvar = (s.sigma2(t + h) - s.sigma2(t - h)) / (2 * h);
            if (b != 0.0) worst_kernel = std::max(worst_kernel, rel(dpsi, b * s.psi(t)));
            else worst_kernel = std::max(worst_kernel, std::abs(dpsi));
            worst_kernel = std::max(worst_kernel, rel(dvar, 2 * b * s.sigma2(t) + g2));
            const double dlam = (s.lambda(t + h) - s.lambda(t - h)) / (2 * h);
            worst_lambda = std::max(worst_lambda, rel(s.lambda(t) * g2 / (2 * dlam), s.sigma2(t)));
        }
    }

    // log rho(x, delta) = D log psi + log p(psi x, t), with log p from the
    // probability-flow ODE and log rho in closed form.
    double worst_conv = 0.0;
    for (const auto& s : families) {
        Eigen::VectorXd ev(4);
        ev << 2.0, 1.0, 0.3, 0.0;
        const auto oracle = GaussianOracle::random_rotation(ev, s, 12, 0.0);
        auto rng = make_rng(13);
        for (double delta : {std::log(0.1), std::log(0.3), std::log(1.0)}) {
            const Eigen::VectorXd x = oracle.mean() + 0.3 * standard_normal(4, rng);
            const double t = s.t_of_delta(delta);
            const double psi = s.psi(t);
            const double lhs = 4 * std::log(psi) + log_density(s, oracle, psi * x, t, 500);
            worst_conv = std::max(worst_conv, std::abs(lhs - oracle.log_convolved(x, delta)));
        }
    }
    o.detail << "kernel rel err " << worst_kernel << ", lambda identity rel err " << worst_lambda
             << " (tol 1e-4); convolution identity abs err " << worst_conv << " (tol 1e-3)";
    o.require(worst_kernel < 1e-4, "kernel consistency");
    o.require(worst_lambda < 1e-4, "lambda identity");
    o.require(worst_conv < 1e-3, "convolution identity");
    return o;
}

// ---------------------------------------------------------------------------
// 4. Trained Gaussian mixture with automatic knee selection.

Outcome trained_mixture()
{
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto cfg = mixture_config();
    const auto dir = trained_run("mixture", cfg);
    const auto table = estimate(cfg, dir, "flipd_auto");
    const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
    std::vector<double> est, lab;
    split(table, est, lab);
    const double m = mae(est, lab);
    const double c = concordance(est, lab, ConcordanceVariant::Literal);
    std::map<int, std::pair<double, int>> by_label;
    for (std::size_t i = 0; i < est.size(); ++i) {
        by_label[static_cast<int>(lab[i])].first += est[i];
        ++by_label[static_cast<int>(lab[i])].second;
    }
    o.detail << est.size() << " points, MAE " << m << " (tol 0.6), concordance " << c << " (must be 1), means";
    for (const auto& [l, s] : by_label) o.detail << " d=" << l << ":" << s.first / s.second;
    o.detail << ", " << minutes << " min (budget 30)";
    o.require(m <= 0.6, "MAE");
    o.require(c == 1.0, "concordance");
    o.require(minutes <= 30.0, "time budget");
    return o;
}

// ---------------------------------------------------------------------------
// 5. Lollipop at a fixed time.

Outcome trained_lollipop()
{
    Outcome o;
    auto cfg = desk_config(11);
    cfg.dataset.kind = "lollipop";
    cfg.estimators.flipd_t0 = 0.05;
    const auto dir = trained_run("lollipop", cfg);
    const auto table = estimate(cfg, dir, "flipd");
    std::vector<double> est, lab;
    split(table, est, lab);
    const double m = mae(est, lab);
    std::map<int, std::pair<double, int>> by_label;
    for (std::size_t i = 0; i < est.size(); ++i) {
        by_label[static_cast<int>(lab[i])].first += est[i];
        ++by_label[static_cast<int>(lab[i])].second;
    }
    std::map<int, double> mean;
    for (const auto& [l, s] : by_label) mean[l] = s.first / s.second;
    o.detail << est.size() << " points, MAE " << m << " (tol 0.35), means";
    for (const auto& [l, v] : mean) o.detail << " d=" << l << ":" << v;
    o.require(m <= 0.35, "MAE");
    o.require(mean.size() == 3 && mean[0] < mean[1] && mean[0] < mean[2], "isolated point lowest");
    return o;
}

// ---------------------------------------------------------------------------
// 6. Normal-bundle baseline.

Outcome normal_bundle()
{
    Outcome o;
    const auto vp = Schedule::vp();
    NbConfig nb;
    nb.t0 = vp.t_of_delta(std::log(0.01));
    nb.columns = 40;
    nb.seed = 3;
    int exact = 0;
    for (int d = 1; d <= 9; ++d) {
        const auto oracle = GaussianOracle::affine(10, d, vp, 500 + d);
        auto rng = make_rng(600 + d);
        const Eigen::VectorXd x = oracle.point_on_support(standard_normal(d, rng));
        if (nb_estimate(vp, oracle, x, nb).lid == d) ++exact;
    }

    auto cfg = desk_config(13);
    cfg.dataset.ambient_dim = 10;
    cfg.dataset.components = {{BaseDistribution::Gaussian, 5, 1.0}};
    cfg.train.epochs = 50;
    cfg.estimators.subsample = 512;
    const auto dir = trained_run("gauss5", cfg);
    const auto table = estimate(cfg, dir, "nb");
    std::vector<double> est, lab;
    split(table, est, lab);
    const double m = mae(est, lab);
    const double mean = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(est.size());
    o.detail << "oracle exact for " << exact << "/9 dimensions; trained N5 in R^10: mean " << mean << ", MAE " << m
             << " (expect saturation, |MAE - 5| <= 0.5)";
    o.require(exact == 9, "oracle");
    o.require(std::abs(m - 5.0) <= 0.5, "saturation");
    return o;
}

// ---------------------------------------------------------------------------
// 7. Hutchinson trace on the trained mixture model.

Outcome hutchinson()
{
    Outcome o;
    auto cfg = mixture_config();
    const auto dir = trained_run("mixture", cfg);
    const auto model = load_run_model(cfg, dir);
    const auto ds = parse_dataset_csv(read_file(dir / artifact::kDataset));
    const auto subset = evaluation_subsample(ds.size(), 512, cfg.subsample_seed());
    Eigen::MatrixXd pts(ds.dim(), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t j = 0; j < subset.size(); ++j) pts.col(static_cast<Eigen::Index>(j)) = ds.points.col(subset[j]);

    const double t0 = 0.05;
    const HutchinsonTrace k50{50, ProbeNoise::Rademacher, 21};
    const auto exact = flipd_batch(cfg.schedule, *model, pts, t0, ExactTrace{});
    const auto approx = flipd_batch(cfg.schedule, *model, pts, t0, k50);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        a.push_back(exact[i].lid);
        b.push_back(approx[i].lid);
    }
    const double rho = spearman(a, b);

    const Eigen::VectorXd y = cfg.schedule.psi(t0) * pts.col(0);
    const double tr = trace_jacobian_exact(*model, y, t0);
    const HutchinsonTrace big{10000, ProbeNoise::Rademacher, 22};
    const Eigen::MatrixXd probes = hutchinson_probes(ds.dim(), big, 0);
    const Eigen::MatrixXd jv = model->score_with_jvp(y, t0, probes).jvp;
    const Eigen::ArrayXd samples = (probes.array() * jv.array()).colwise().sum().transpose();
    const double mean = samples.mean();
    const double se = std::sqrt((samples - mean).square().sum() / (samples.size() - 1) / samples.size());
    o.detail << "Spearman(k=50, exact) over 512 points at t0 = 0.05: " << rho << " (> 0.95); k=1e4 mean " << mean
             << " vs exact " << tr << ", " << std::abs(mean - tr) / se << " SE (< 3)";
    o.require(rho > 0.95, "rank correlation");
    o.require(std::abs(mean - tr) < 3 * se, "unbiased trace");
    return o;
}

// ---------------------------------------------------------------------------
// 8. Gradient and JVP against finite differences.

Outcome derivative_checks()
{
    Outcome o;
    int jvp_fail = 0, jvp_n = 0, grad_fail = 0, grad_n = 0;
    for (auto output : {OutputParam::Noise, OutputParam::Score}) {
        const auto sched = Schedule::vp();
        MlpScore net = test::random_mlp({6, {24, 12, 24}, 8, output}, sched, 41, 0.3);
        auto rng = make_rng(42);
        std::uniform_real_distribution<double> unif(0.05, 0.95);
        for (int trial = 0; trial < 25; ++trial, ++jvp_n) {
            const Eigen::VectorXd x = standard_normal(6, rng);
            const Eigen::VectorXd v = standard_normal(6, rng);
            const double t = unif(rng);
            const double h = 1e-4;
            const Eigen::VectorXd fd = (score(net, x + h * v, t) - score(net, x - h * v, t)) / (2 * h);
            const Eigen::VectorXd jvp = score_jvp(net, x, t, v);
            if ((jvp - fd).norm() > 1e-3 * std::max(fd.norm(), 1e-8)) ++jvp_fail;
        }

        const Eigen::MatrixXd batch = standard_normal(6, 8, rng);
        const auto draw = draw_noise(6, 8, 0.05, rng);
        auto grads = net.zero_like();
        (void)dsm_loss_mlp(net, batch, draw, Weighting::Likelihood, &grads);
        MlpScore holder = net;
        holder.layers() = grads;
        const Eigen::VectorXd g = holder.flat_parameters();
        const Eigen::VectorXd theta = net.flat_parameters();
        std::uniform_int_distribution<Eigen::Index> pick(0, theta.size() - 1);
        for (int checked = 0; checked < 25;) {
            const Eigen::Index k = pick(rng);
            if (std::abs(g[k]) < 1e-6) continue;
            const double h = 1e-5;
            Eigen::VectorXd tp = theta, tm = theta;
            tp[k] += h;
            tm[k] -= h;
            MlpScore a = net, b = net;
            a.set_flat_parameters(tp);
            b.set_flat_parameters(tm);
            const double fd = (dsm_loss_mlp(a, batch, draw, Weighting::Likelihood) -
                               dsm_loss_mlp(b, batch, draw, Weighting::Likelihood)) /
                              (2 * h);
            if (std::abs(fd - g[k]) > 1e-3 * std::abs(g[k])) ++grad_fail;
            ++checked;
            ++grad_n;
        }
    }
    o.detail << "JVP " << jvp_n - jvp_fail << "/" << jvp_n << " directions, weight gradient " << grad_n - grad_fail
             << "/" << grad_n << " weights within relative error 1e-3";
    o.require(jvp_fail == 0 && jvp_n >= 20, "JVP");
    o.require(grad_fail == 0 && grad_n >= 20, "gradient");
    return o;
}

// ---------------------------------------------------------------------------
// 9. Determinism of the seeded pipeline.

Outcome determinism()
{
    Outcome o;
    ExperimentConfig cfg;
    cfg.seed = 5;
    cfg.dataset.ambient_dim = 5;
    cfg.dataset.size = 2000;
    cfg.dataset.components = {{BaseDistribution::Gaussian, 1, 1.0}, {BaseDistribution::Laplace, 3, 1.0}};
    cfg.model.hidden = {32, 16, 32};
    cfg.model.time_embed_dim = 8;
    cfg.train.epochs = 3;
    cfg.estimators.subsample = 64;
    const std::vector<std::string> estimators{"flipd", "flipd_auto", "lidl", "nb", "lpca", "mle"};
    std::vector<fs::path> dirs;
    for (int workers : {1, 0}) {
        const auto dir = g_work_dir / ("determinism_" + std::to_string(dirs.size()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        RunOptions opts;
        opts.out_dir = dir;
        opts.workers = workers;
        cmd_generate(cfg, opts);
        cmd_train(cfg, opts);
        for (const auto& e : estimators) cmd_estimate(cfg, opts, e);
        cmd_report(cfg, opts);
        dirs.push_back(dir);
    }
    int compared = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
        const auto name = entry.path().filename();
        ++compared;
        if (!fs::exists(dirs[1] / name) || read_file(entry.path()) != read_file(dirs[1] / name)) ++differing;
    }
    o.detail << compared << " artifacts compared across two runs (serial and OpenMP), " << differing << " differ";
    o.require(compared >= 12 && differing == 0, "byte-identical artifacts");
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            std::stringstream list(argv[++i]);
            for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
        } else {
            g_work_dir = arg;
        }
    }
    fs::create_directories(g_work_dir);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle small-scale limit (FLIPD and LIDL, d in {1,2,5,9}, D = 10)", oracle_limit},
        {"multiscale Gaussian oracle curve", multiscale_oracle},
        {"schedule and convolution identities", schedule_identities},
        {"trained Gaussian mixture, FLIPD with knee selection", trained_mixture},
        {"trained lollipop, FLIPD at t0 = 0.05", trained_lollipop},
        {"normal-bundle baseline", normal_bundle},
        {"Hutchinson trace on a trained model", hutchinson},
        {"gradient and JVP finite-difference checks", derivative_checks},
        {"determinism of seeded pipeline runs", determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (outcome.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << criteria[i].first << " -- "
                  << outcome.detail.str() << " [" << secs << " s]" << std::endl;
        if (!outcome.pass) ++failures;
    }
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
