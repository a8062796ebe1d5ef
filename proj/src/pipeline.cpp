#include "lid/pipeline.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lid/bench.hpp"
#include "lid/errors.hpp"
#include "lid/gaussian_oracle.hpp"
#include "lid/io.hpp"
#include "lid/metrics.hpp"
#include "lid/mlp_score.hpp"
#include "lid/modelfree.hpp"
#include "lid/rng.hpp"

namespace lid {

namespace fs = std::filesystem;

std::string artifact::results(const std::string& estimator) { return "results_" + estimator + ".csv"; }

namespace {

// Report column order: model-based estimators first, then model-free ones.
const std::vector<std::string> kEstimatorOrder = {"flipd_auto", "flipd", "nb", "lidl", "lpca", "mle"};

void say(const RunOptions& opts, const std::string& msg)
{
    if (opts.log) *opts.log << msg << std::endl;
}

std::string dataset_hash(const fs::path& dir) { return hex64(fnv1a64(read_file(dir / artifact::kDataset))); }

LabeledDataset load_dataset(const fs::path& dir)
{
    const auto path = dir / artifact::kDataset;
    if (!fs::exists(path)) throw IoError("dataset '" + path.string() + "' not found (run generate first)");
    return parse_dataset_csv(read_file(path));
}

std::string dataset_name(const ExperimentConfig& cfg)
{
    if (cfg.dataset.kind != "mixture") return cfg.dataset.kind;
    std::string name;
    for (const auto& c : cfg.dataset.components) {
        if (!name.empty()) name += "+";
        const char letter = c.base == BaseDistribution::Uniform ? 'U' : c.base == BaseDistribution::Gaussian ? 'N' : 'L';
        name += letter + std::to_string(c.intrinsic_dim);
    }
    return name + " in R^" + std::to_string(cfg.dataset.ambient_dim);
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& points, const std::vector<Eigen::Index>& idx)
{
    Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = points.col(idx[i]);
    return out;
}

}  // namespace

bool is_model_based(const std::string& estimator)
{
    return estimator == "flipd" || estimator == "flipd_auto" || estimator == "lidl" || estimator == "nb";
}

std::string frozen_config(const ExperimentConfig& cfg)
{
    auto j = to_json(cfg);
    j["config_hash"] = config_hash(cfg);
    return j.dump(2) + "\n";
}

std::vector<Eigen::Index> evaluation_subsample(Eigen::Index n, Eigen::Index size, std::uint64_t seed)
{
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    if (size >= n) return all;
    // Partial Fisher-Yates keeps the selection independent of the standard
    // library's sampling algorithm.
    auto rng = make_rng(seed, {0x7375});
    for (Eigen::Index i = 0; i < size; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
    }
    all.resize(static_cast<std::size_t>(size));
    std::sort(all.begin(), all.end());
    return all;
}

std::shared_ptr<const ScoreModel> load_run_model(const ExperimentConfig& cfg, const fs::path& dir)
{
    if (cfg.model.type == "gaussian_oracle") {
        Eigen::VectorXd ev = Eigen::Map<const Eigen::VectorXd>(cfg.model.oracle_eigenvalues.data(),
                                                               static_cast<Eigen::Index>(cfg.model.oracle_eigenvalues.size()));
        return std::make_shared<GaussianOracle>(
            GaussianOracle::random_rotation(ev, cfg.schedule, cfg.init_seed(), cfg.model.oracle_mean_scale));
    }
    const auto path = dir / artifact::kCheckpoint;
    if (!fs::exists(path)) throw IoError("checkpoint '" + path.string() + "' not found (run train first)");
    auto model = std::make_shared<MlpScore>(MlpScore::load(path));
    if (!(model->schedule() == cfg.schedule)) throw ValidationError("checkpoint schedule differs from the config");
    if (model->dim() != cfg.ambient_dim()) throw ValidationError("checkpoint dimension differs from the config");
    return model;
}

void cmd_generate(const ExperimentConfig& cfg, const RunOptions& opts)
{
    cfg.validate();
    const auto dir = opts.out_dir;
    const auto config_path = dir / artifact::kConfig;
    const auto data_path = dir / artifact::kDataset;
    if (!opts.force)
        for (const auto& p : {config_path, data_path})
            if (fs::exists(p)) throw IoError("'" + p.string() + "' already exists (pass --force to overwrite)");

    const LabeledDataset ds = cfg.dataset.kind == "mixture" ? generate(cfg.manifold_spec(), cfg.dataset.size)
                                                            : toy_dataset(cfg.dataset.kind, cfg.dataset.size, cfg.dataset_seed());
    say(opts, "generated " + std::to_string(ds.size()) + " points in R^" + std::to_string(ds.dim()));
    write_file(config_path, frozen_config(cfg), opts.force);
    write_file(data_path, dataset_csv(ds, {{"config_hash", config_hash(cfg)}, {"dataset", dataset_name(cfg)}}), opts.force);
}

void cmd_train(const ExperimentConfig& cfg, const RunOptions& opts)
{
    cfg.validate();
    if (cfg.model.type != "mlp") throw ValidationError("model type '" + cfg.model.type + "' needs no training");
    const auto dir = opts.out_dir;
    const auto ckpt_path = dir / artifact::kCheckpoint;
    const auto loss_path = dir / artifact::kLoss;
    if (!opts.force)
        for (const auto& p : {ckpt_path, loss_path})
            if (fs::exists(p)) throw IoError("'" + p.string() + "' already exists (pass --force to overwrite)");

    const auto ds = load_dataset(dir);
    if (ds.dim() != cfg.ambient_dim()) throw ValidationError("dataset dimension differs from the config");

    MlpScore model(cfg.architecture(), cfg.schedule);
    model.init_random(cfg.init_seed());
    const auto tc = cfg.train_config();
    const int epochs = tc.epochs.value_or(default_epochs(ds.dim()));
    say(opts, "training " + std::to_string(model.parameter_count()) + " parameters for " + std::to_string(epochs) +
                  " epochs on " + std::to_string(ds.size()) + " points");
    auto result = train(std::move(model), ds.points, tc, [&](int epoch, double loss) {
        if (opts.log && (epoch % 10 == 0 || epoch + 1 == epochs))
            *opts.log << "epoch " << epoch << " loss " << loss << std::endl;
    });

    std::ostringstream ckpt;
    result.model.save(ckpt);
    write_file(ckpt_path, ckpt.str(), opts.force);

    std::ostringstream loss;
    loss << "# config_hash=" << config_hash(cfg) << "\n# dataset_hash=" << dataset_hash(dir) << "\nepoch,mean_loss\n";
    for (std::size_t e = 0; e < result.loss_trace.size(); ++e) loss << e << "," << format_double(result.loss_trace[e]) << "\n";
    write_file(loss_path, loss.str(), opts.force);
}

void cmd_estimate(const ExperimentConfig& cfg, const RunOptions& opts, const std::string& estimator)
{
    cfg.validate();
    static const std::vector<std::string> known = {"flipd", "flipd_auto", "lidl", "nb", "lpca", "mle"};
    if (std::find(known.begin(), known.end(), estimator) == known.end())
        throw ValidationError("unknown estimator '" + estimator + "'");
    const auto dir = opts.out_dir;
    const auto out_path = dir / artifact::results(estimator);
    if (fs::exists(out_path) && !opts.force)
        throw IoError("'" + out_path.string() + "' already exists (pass --force to overwrite)");

    const auto ds = load_dataset(dir);
    if (ds.dim() != cfg.ambient_dim()) throw ValidationError("dataset dimension differs from the config");
    const auto subset = evaluation_subsample(ds.size(), cfg.estimators.subsample, cfg.subsample_seed());
    const Eigen::MatrixXd queries = gather(ds.points, subset);
    const Execution exec{opts.workers, false};

    ResultTable table;
    table.meta = {{"config_hash", config_hash(cfg)}, {"dataset_hash", dataset_hash(dir)}, {"dataset", dataset_name(cfg)},
                  {"estimator", estimator}, {"points", std::to_string(subset.size())}};
    std::vector<LidRecord> records;
    const auto& e = cfg.estimators;

    say(opts, "running " + estimator + " on " + std::to_string(subset.size()) + " points");
    if (is_model_based(estimator)) {
        const auto model = load_run_model(cfg, dir);
        if (model->dim() != ds.dim()) throw ValidationError("model dimension differs from the dataset");
        const auto mode = cfg.trace_mode();
        if (estimator == "flipd") {
            table.meta.emplace_back("t0", format_double(e.flipd_t0));
            table.meta.emplace_back("trace_mode", describe(mode));
            records = flipd_batch(cfg.schedule, *model, queries, e.flipd_t0, mode, exec);
        } else if (estimator == "flipd_auto") {
            table.meta.emplace_back("curve_points", std::to_string(e.curve_points));
            table.meta.emplace_back("knee_shape", to_string(e.knee_shape));
            table.meta.emplace_back("fallback_t0", format_double(e.fallback_t0));
            table.meta.emplace_back("trace_mode", describe(mode));
            records = flipd_auto_batch(cfg.schedule, *model, queries, mode, cfg.auto_config(), exec);
        } else if (estimator == "lidl") {
            const auto grid = cfg.delta_grid();
            table.meta.emplace_back("grid", grid.describe());
            table.meta.emplace_back("rk_steps", std::to_string(e.lidl_rk_steps));
            records = lidl_batch(cfg.schedule, *model, queries, grid, mode, e.lidl_rk_steps, exec);
        } else {
            const auto nb = cfg.nb_config();
            table.meta.emplace_back("nb_K", std::to_string(nb.resolved_columns(ds.dim())));
            table.meta.emplace_back("nb_t0", format_double(nb.t0));
            table.meta.emplace_back("nb_threshold", to_string(nb.threshold));
            records = nb_batch(cfg.schedule, *model, queries, nb, exec);
        }
    } else {
        const int k = e.knn_k > 0 ? e.knn_k : NeighborIndex::default_k(ds.dim());
        const NeighborIndex index(ds.points, k);
        table.meta.emplace_back("k", std::to_string(k));
        if (estimator == "lpca") {
            table.meta.emplace_back("alpha", format_double(e.lpca_alpha));
            records = lpca_batch(index, queries, e.lpca_alpha, exec);
        } else {
            records = mle_batch(index, queries, exec);
            std::vector<double> local;
            for (const auto& r : records) local.push_back(r.lid);
            table.meta.emplace_back("mle_global", format_double(mle_global(local)));
        }
    }

    int fallbacks = 0;
    for (const auto& r : records) {
        const auto idx = subset[static_cast<std::size_t>(r.index)];
        table.rows.push_back({idx, estimator, r.lid, r.t0, ds.lid_labels[static_cast<std::size_t>(idx)], r.trace_mode,
                              r.fallback, r.extra});
        fallbacks += r.fallback ? 1 : 0;
    }
    if (estimator == "flipd_auto") table.meta.emplace_back("fallbacks", std::to_string(fallbacks));
    write_file(out_path, results_csv(table), opts.force);
}

namespace {

struct Summary {
    std::string estimator;
    std::size_t points = 0;
    double mae = 0.0;
    double concordance = 0.0;
    double mean_estimate = 0.0;
    int fallbacks = 0;
};

std::string fixed3(double v)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

}  // namespace

void cmd_report(const ExperimentConfig& cfg, const RunOptions& opts)
{
    cfg.validate();
    const auto dir = opts.out_dir;
    const auto ds = load_dataset(dir);
    const std::string hash = dataset_hash(dir);

    std::map<std::string, ResultTable> tables;
    for (const auto& name : kEstimatorOrder) {
        const auto path = dir / artifact::results(name);
        if (fs::exists(path)) tables.emplace(name, parse_results_csv(read_file(path)));
    }
    if (tables.empty()) throw ValidationError("no results to report in '" + dir.string() + "'");

    std::vector<Summary> rows;
    for (const auto& name : kEstimatorOrder) {
        auto it = tables.find(name);
        if (it == tables.end()) continue;
        const auto& t = it->second;
        if (t.get("dataset_hash") != hash)
            throw ValidationError("results for " + name + " were computed on a different dataset");
        if (t.rows.size() < 2) throw ValidationError("results for " + name + " have fewer than two points");
        std::vector<double> est, lab;
        Summary s;
        s.estimator = name;
        for (const auto& r : t.rows) {
            est.push_back(r.lid);
            lab.push_back(r.label);
            s.fallbacks += r.fallback ? 1 : 0;
        }
        s.points = est.size();
        s.mae = mae(est, lab);
        s.concordance = concordance(est, lab, cfg.estimators.concordance);
        s.mean_estimate = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(est.size());
        rows.push_back(s);
    }

    const std::string name = dataset_name(cfg);
    const std::string chash = config_hash(cfg);
    std::ostringstream csv;
    csv << "# config_hash=" << chash << "\n# dataset_hash=" << hash << "\n";
    csv << "dataset,estimator,group,points,mae,concordance,mean_estimate,fallbacks\n";
    for (const auto& s : rows)
        csv << name << "," << s.estimator << "," << (is_model_based(s.estimator) ? "model-based" : "model-free") << ","
            << s.points << "," << format_double(s.mae) << "," << format_double(s.concordance) << ","
            << format_double(s.mean_estimate) << "," << s.fallbacks << "\n";

    std::ostringstream txt;
    txt << "config_hash " << chash << "\n";
    txt << "dataset " << name << " (" << ds.size() << " points, hash " << hash << ")\n";
    txt << "concordance variant: "
        << (cfg.estimators.concordance == ConcordanceVariant::Literal ? "literal" : "exclude_ties") << "\n\n";
    for (const bool model_based : {true, false}) {
        txt << (model_based ? "Model-based" : "Model-free") << "\n";
        txt << "  " << std::left << std::setw(12) << "estimator" << std::right << std::setw(8) << "points"
            << std::setw(10) << "MAE" << std::setw(10) << "C" << std::setw(10) << "mean" << std::setw(11)
            << "fallbacks" << "\n";
        bool any = false;
        for (const auto& s : rows) {
            if (is_model_based(s.estimator) != model_based) continue;
            any = true;
            txt << "  " << std::left << std::setw(12) << s.estimator << std::right << std::setw(8) << s.points
                << std::setw(10) << fixed3(s.mae) << std::setw(10) << fixed3(s.concordance) << std::setw(10)
                << fixed3(s.mean_estimate) << std::setw(11) << s.fallbacks << "\n";
        }
        if (!any) txt << "  (none)\n";
        txt << "\n";
    }

    // FLIPD curves for a few points, when a score model is available.
    std::shared_ptr<const ScoreModel> model;
    if (cfg.model.type == "gaussian_oracle" || fs::exists(dir / artifact::kCheckpoint)) model = load_run_model(cfg, dir);
    std::string curves;
    if (model) {
        std::vector<Eigen::Index> picks = cfg.estimators.curve_indices;
        if (picks.empty()) {
            std::vector<int> seen;
            for (Eigen::Index i = 0; i < ds.size(); ++i) {
                const int c = ds.component_ids[static_cast<std::size_t>(i)];
                if (std::find(seen.begin(), seen.end(), c) == seen.end()) {
                    seen.push_back(c);
                    picks.push_back(i);
                }
            }
        }
        const auto grid = uniform_time_grid(cfg.estimators.curve_points);
        const auto mode = cfg.trace_mode();
        std::ostringstream os;
        os << "# config_hash=" << chash << "\n# dataset_hash=" << hash << "\n# trace_mode=" << describe(mode) << "\n";
        os << "point_index,lid_label,t0,flipd\n";
        for (const auto idx : picks) {
            if (idx < 0 || idx >= ds.size()) throw ValidationError("curve index " + std::to_string(idx) + " out of range");
            const auto curve = flipd_curve(cfg.schedule, *model, ds.points.col(idx), grid, mode, static_cast<std::uint64_t>(idx));
            for (std::size_t g = 0; g < grid.size(); ++g)
                os << idx << "," << ds.lid_labels[static_cast<std::size_t>(idx)] << "," << format_double(grid[g]) << ","
                   << format_double(curve.values[g]) << "\n";
        }
        curves = os.str();
        txt << "FLIPD curves for " << picks.size() << " points written to " << artifact::kCurves << "\n";
    }

    write_file(dir / artifact::kReportCsv, csv.str(), opts.force);
    write_file(dir / artifact::kReportText, txt.str(), opts.force);
    if (!curves.empty()) write_file(dir / artifact::kCurves, curves, opts.force);
    say(opts, txt.str());
}

}  // namespace lid
