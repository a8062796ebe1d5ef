#include "lid/config.hpp"

#include <set>

#include "lid/errors.hpp"
#include "lid/io.hpp"
#include "lid/rng.hpp"

namespace lid {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section)
{
    if (!j.is_object()) throw ValidationError("config section '" + section + "' must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ValidationError("unknown config key '" + section + "." + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config key '" + section + "." + key + "' has the wrong type");
    }
}

std::string output_name(OutputParam p) { return p == OutputParam::Noise ? "noise" : "score"; }

OutputParam output_from_name(const std::string& s)
{
    if (s == "noise") return OutputParam::Noise;
    if (s == "score") return OutputParam::Score;
    throw ValidationError("unknown model output '" + s + "'");
}

json schedule_json(const Schedule& s)
{
    if (s.kind() == ScheduleKind::VE)
        return {{"kind", "VE"}, {"sigma_min", s.sigma_min()}, {"sigma_max", s.sigma_max()}};
    return {{"kind", to_string(s.kind())}, {"beta0", s.beta0()}, {"beta1", s.beta1()}};
}

Schedule schedule_from(const json& j)
{
    std::string kind = "VP";
    read(j, "kind", kind, "schedule");
    const auto k = schedule_kind_from_string(kind);
    if (k == ScheduleKind::VE) {
        check_keys(j, {"kind", "sigma_min", "sigma_max"}, "schedule");
        double lo = 0.01, hi = 50.0;
        read(j, "sigma_min", lo, "schedule");
        read(j, "sigma_max", hi, "schedule");
        return Schedule::ve(lo, hi);
    }
    check_keys(j, {"kind", "beta0", "beta1"}, "schedule");
    double b0 = 0.1, b1 = 20.1;
    read(j, "beta0", b0, "schedule");
    read(j, "beta1", b1, "schedule");
    return k == ScheduleKind::VP ? Schedule::vp(b0, b1) : Schedule::sub_vp(b0, b1);
}

}  // namespace

json to_json(const ExperimentConfig& c)
{
    json comps = json::array();
    for (const auto& comp : c.dataset.components)
        comps.push_back({{"base", to_string(comp.base)}, {"dim", comp.intrinsic_dim}, {"weight", comp.weight}});

    const auto& t = c.train;
    const auto& e = c.estimators;
    return {
        {"seed", c.seed},
        {"output_dir", c.output_dir},
        {"dataset",
         {{"kind", c.dataset.kind},
          {"components", comps},
          {"ambient_dim", c.dataset.ambient_dim},
          {"mode_separation", c.dataset.mode_separation},
          {"size", c.dataset.size}}},
        {"schedule", schedule_json(c.schedule)},
        {"model",
         {{"type", c.model.type},
          {"hidden", c.model.hidden},
          {"time_embed_dim", c.model.time_embed_dim},
          {"output", output_name(c.model.output)},
          {"oracle_eigenvalues", c.model.oracle_eigenvalues},
          {"oracle_mean_scale", c.model.oracle_mean_scale}}},
        {"train",
         {{"lr", t.lr},
          {"epochs", t.epochs ? json(*t.epochs) : json(nullptr)},
          {"batch_size", t.batch_size},
          {"warmup_steps", t.warmup_steps},
          {"weighting", to_string(t.weighting)},
          {"t_min", t.t_min},
          {"weight_decay", t.weight_decay},
          {"adam_beta1", t.adam_beta1},
          {"adam_beta2", t.adam_beta2},
          {"adam_eps", t.adam_eps},
          {"divergence_threshold", t.divergence_threshold}}},
        {"estimators",
         {{"selected", e.selected},
          {"trace", e.trace},
          {"hutchinson_samples", e.hutchinson_samples},
          {"probe_noise", to_string(e.probe_noise)},
          {"flipd_t0", e.flipd_t0},
          {"curve_points", e.curve_points},
          {"knee_sensitivity", e.knee_sensitivity},
          {"knee_shape", to_string(e.knee_shape)},
          {"fallback_t0", e.fallback_t0},
          {"lidl_scales", e.lidl_scales},
          {"lidl_rk_steps", e.lidl_rk_steps},
          {"nb_t0", e.nb_t0},
          {"nb_columns", e.nb_columns},
          {"nb_threshold", to_string(e.nb_threshold)},
          {"nb_num_tau", e.nb_num_tau},
          {"nb_tau_min", e.nb_tau_min},
          {"nb_tau_max", e.nb_tau_max},
          {"knn_k", e.knn_k},
          {"lpca_alpha", e.lpca_alpha},
          {"subsample", e.subsample},
          {"concordance", e.concordance == ConcordanceVariant::Literal ? "literal" : "exclude_ties"},
          {"curve_indices", e.curve_indices}}},
    };
}

ExperimentConfig config_from_json(const json& j)
{
    check_keys(j, {"seed", "output_dir", "dataset", "schedule", "model", "train", "estimators", "config_hash"}, "root");
    ExperimentConfig c;
    read(j, "seed", c.seed, "root");
    read(j, "output_dir", c.output_dir, "root");

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        check_keys(d, {"kind", "components", "ambient_dim", "mode_separation", "size"}, "dataset");
        read(d, "kind", c.dataset.kind, "dataset");
        read(d, "ambient_dim", c.dataset.ambient_dim, "dataset");
        read(d, "mode_separation", c.dataset.mode_separation, "dataset");
        read(d, "size", c.dataset.size, "dataset");
        if (d.contains("components")) {
            if (!d.at("components").is_array()) throw ValidationError("dataset.components must be a list");
            for (const auto& cj : d.at("components")) {
                check_keys(cj, {"base", "dim", "weight"}, "dataset.components");
                ComponentSpec comp;
                std::string base = "gaussian";
                read(cj, "base", base, "dataset.components");
                comp.base = base_distribution_from_string(base);
                read(cj, "dim", comp.intrinsic_dim, "dataset.components");
                read(cj, "weight", comp.weight, "dataset.components");
                c.dataset.components.push_back(comp);
            }
        }
    }
    if (j.contains("schedule")) c.schedule = schedule_from(j.at("schedule"));

    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m, {"type", "hidden", "time_embed_dim", "output", "oracle_eigenvalues", "oracle_mean_scale"}, "model");
        read(m, "type", c.model.type, "model");
        read(m, "hidden", c.model.hidden, "model");
        read(m, "time_embed_dim", c.model.time_embed_dim, "model");
        std::string out = output_name(c.model.output);
        read(m, "output", out, "model");
        c.model.output = output_from_name(out);
        read(m, "oracle_eigenvalues", c.model.oracle_eigenvalues, "model");
        read(m, "oracle_mean_scale", c.model.oracle_mean_scale, "model");
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t, {"lr", "epochs", "batch_size", "warmup_steps", "weighting", "t_min", "weight_decay", "adam_beta1",
                       "adam_beta2", "adam_eps", "divergence_threshold"},
                   "train");
        auto& tc = c.train;
        read(t, "lr", tc.lr, "train");
        if (t.contains("epochs") && !t.at("epochs").is_null()) {
            int epochs = 0;
            read(t, "epochs", epochs, "train");
            tc.epochs = epochs;
        }
        read(t, "batch_size", tc.batch_size, "train");
        read(t, "warmup_steps", tc.warmup_steps, "train");
        std::string weighting = to_string(tc.weighting);
        read(t, "weighting", weighting, "train");
        tc.weighting = weighting_from_string(weighting);
        read(t, "t_min", tc.t_min, "train");
        read(t, "weight_decay", tc.weight_decay, "train");
        read(t, "adam_beta1", tc.adam_beta1, "train");
        read(t, "adam_beta2", tc.adam_beta2, "train");
        read(t, "adam_eps", tc.adam_eps, "train");
        read(t, "divergence_threshold", tc.divergence_threshold, "train");
    }

    if (j.contains("estimators")) {
        const auto& e = j.at("estimators");
        const std::string s = "estimators";
        check_keys(e, {"selected", "trace", "hutchinson_samples", "probe_noise", "flipd_t0", "curve_points",
                       "knee_sensitivity", "knee_shape", "fallback_t0", "lidl_scales", "lidl_rk_steps", "nb_t0",
                       "nb_columns", "nb_threshold", "nb_num_tau", "nb_tau_min", "nb_tau_max", "knn_k", "lpca_alpha",
                       "subsample", "curve_indices", "concordance"},
                   s);
        auto& ec = c.estimators;
        read(e, "selected", ec.selected, s);
        read(e, "trace", ec.trace, s);
        read(e, "hutchinson_samples", ec.hutchinson_samples, s);
        std::string noise = to_string(ec.probe_noise);
        read(e, "probe_noise", noise, s);
        ec.probe_noise = probe_noise_from_string(noise);
        read(e, "flipd_t0", ec.flipd_t0, s);
        read(e, "curve_points", ec.curve_points, s);
        read(e, "knee_sensitivity", ec.knee_sensitivity, s);
        std::string shape = to_string(ec.knee_shape);
        read(e, "knee_shape", shape, s);
        ec.knee_shape = knee_shape_from_string(shape);
        read(e, "fallback_t0", ec.fallback_t0, s);
        read(e, "lidl_scales", ec.lidl_scales, s);
        read(e, "lidl_rk_steps", ec.lidl_rk_steps, s);
        read(e, "nb_t0", ec.nb_t0, s);
        read(e, "nb_columns", ec.nb_columns, s);
        std::string thr = to_string(ec.nb_threshold);
        read(e, "nb_threshold", thr, s);
        ec.nb_threshold = nb_threshold_from_string(thr);
        read(e, "nb_num_tau", ec.nb_num_tau, s);
        read(e, "nb_tau_min", ec.nb_tau_min, s);
        read(e, "nb_tau_max", ec.nb_tau_max, s);
        read(e, "knn_k", ec.knn_k, s);
        read(e, "lpca_alpha", ec.lpca_alpha, s);
        read(e, "subsample", ec.subsample, s);
        read(e, "curve_indices", ec.curve_indices, s);
        std::string conc = "literal";
        read(e, "concordance", conc, s);
        if (conc == "literal")
            ec.concordance = ConcordanceVariant::Literal;
        else if (conc == "exclude_ties")
            ec.concordance = ConcordanceVariant::ExcludeTies;
        else
            throw ValidationError("concordance must be literal or exclude_ties");
    }
    c.validate();
    if (j.contains("config_hash")) {
        std::string claimed;
        read(j, "config_hash", claimed, "root");
        if (claimed != config_hash(c)) throw ValidationError("config_hash does not match the config contents");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

std::string dump_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(to_json(cfg).dump())); }

namespace {

const std::set<std::string> kEstimators = {"flipd", "flipd_auto", "lidl", "nb", "lpca", "mle"};

}  // namespace

void ExperimentConfig::validate() const
{
    if (dataset.kind == "mixture") {
        manifold_spec().validate();
    } else if (dataset.kind != "lollipop" && dataset.kind != "swiss_roll" && dataset.kind != "string_in_doughnut") {
        throw ValidationError("unknown dataset kind '" + dataset.kind + "'");
    }
    if (dataset.size < 1) throw ValidationError("dataset size must be positive");

    if (model.type == "mlp") {
        architecture();
        MlpScore probe(architecture(), schedule);
    } else if (model.type == "gaussian_oracle") {
        if (static_cast<Eigen::Index>(model.oracle_eigenvalues.size()) != ambient_dim())
            throw ValidationError("oracle needs one eigenvalue per ambient dimension");
        for (double v : model.oracle_eigenvalues)
            if (!(v >= 0.0)) throw ValidationError("oracle eigenvalues must be nonnegative");
    } else {
        throw ValidationError("unknown model type '" + model.type + "'");
    }
    train_config().validate();

    for (const auto& name : estimators.selected)
        if (!kEstimators.count(name)) throw ValidationError("unknown estimator '" + name + "'");
    if (estimators.trace != "auto" && estimators.trace != "exact" && estimators.trace != "hutchinson")
        throw ValidationError("trace must be auto, exact or hutchinson");
    lid::validate(trace_mode());
    if (!(estimators.flipd_t0 >= kTimeFloor && estimators.flipd_t0 < 1.0))
        throw ValidationError("flipd_t0 outside [t_min, 1)");
    auto_config().validate();
    delta_grid();
    if (estimators.lidl_rk_steps < 8) throw ValidationError("lidl_rk_steps must be >= 8");
    nb_config().validate();
    if (estimators.knn_k < 0) throw ValidationError("knn_k must be nonnegative");
    if (!(estimators.lpca_alpha > 0.0 && estimators.lpca_alpha < 1.0)) throw ValidationError("lpca_alpha must lie in (0, 1)");
    if (estimators.subsample < 1) throw ValidationError("subsample must be positive");
}

std::uint64_t ExperimentConfig::dataset_seed() const { return stream_key(seed, {1}); }
std::uint64_t ExperimentConfig::init_seed() const { return stream_key(seed, {2}); }
std::uint64_t ExperimentConfig::train_seed() const { return stream_key(seed, {3}); }
std::uint64_t ExperimentConfig::estimator_seed() const { return stream_key(seed, {4}); }
std::uint64_t ExperimentConfig::subsample_seed() const { return stream_key(seed, {5}); }

Eigen::Index ExperimentConfig::ambient_dim() const
{
    if (dataset.kind == "mixture") return dataset.ambient_dim;
    if (dataset.kind == "lollipop") return 2;
    return 3;
}

ManifoldSpec ExperimentConfig::manifold_spec() const
{
    ManifoldSpec spec;
    spec.components = dataset.components;
    spec.ambient_dim = dataset.ambient_dim;
    spec.mode_separation = dataset.mode_separation;
    spec.seed = dataset_seed();
    return spec;
}

TraceMode ExperimentConfig::trace_mode() const
{
    if (estimators.trace == "exact") return ExactTrace{};
    if (estimators.trace == "hutchinson")
        return HutchinsonTrace{estimators.hutchinson_samples, estimators.probe_noise, estimator_seed()};
    auto mode = default_trace_mode(ambient_dim(), estimator_seed());
    if (auto* h = std::get_if<HutchinsonTrace>(&mode)) {
        h->samples = estimators.hutchinson_samples;
        h->noise = estimators.probe_noise;
    }
    return mode;
}

AutoConfig ExperimentConfig::auto_config() const
{
    AutoConfig a;
    a.t_grid = uniform_time_grid(estimators.curve_points);
    a.sensitivity = estimators.knee_sensitivity;
    a.shape = estimators.knee_shape;
    a.fallback_t0 = estimators.fallback_t0;
    return a;
}

NbConfig ExperimentConfig::nb_config() const
{
    NbConfig n;
    n.t0 = estimators.nb_t0;
    n.columns = estimators.nb_columns;
    n.threshold = estimators.nb_threshold;
    n.num_tau = estimators.nb_num_tau;
    n.tau_min = estimators.nb_tau_min;
    n.tau_max = estimators.nb_tau_max;
    n.sensitivity = estimators.knee_sensitivity;
    n.seed = estimator_seed();
    return n;
}

DeltaGrid ExperimentConfig::delta_grid() const
{
    auto grid = DeltaGrid::from_scales(estimators.lidl_scales);
    grid.validate(schedule);
    return grid;
}

MlpArchitecture ExperimentConfig::architecture() const
{
    MlpArchitecture a;
    a.input_dim = ambient_dim();
    a.hidden = model.hidden;
    a.time_embed_dim = model.time_embed_dim;
    a.output = model.output;
    return a;
}

TrainConfig ExperimentConfig::train_config() const
{
    TrainConfig t = train;
    t.seed = train_seed();
    return t;
}

}  // namespace lid
