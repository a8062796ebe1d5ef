#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lid/bench.hpp"
#include "lid/flipd.hpp"
#include "lid/lidl_ode.hpp"
#include "lid/metrics.hpp"
#include "lid/mlp_score.hpp"
#include "lid/nb.hpp"
#include "lid/schedule.hpp"
#include "lid/train.hpp"

namespace lid {

struct DatasetConfig {
    /// "mixture", or the name of a toy generator (lollipop, swiss_roll,
    /// string_in_doughnut).
    std::string kind = "mixture";
    /// Mixture only; toy generators fix their own ambient dimension.
    std::vector<ComponentSpec> components;
    int ambient_dim = 0;
    double mode_separation = 20.0;
    Eigen::Index size = 100000;

    bool operator==(const DatasetConfig&) const = default;
};

struct ModelConfig {
    /// "mlp" (trained) or "gaussian_oracle" (closed form, no training).
    std::string type = "mlp";
    std::vector<int> hidden = {256, 128, 64, 128, 256};
    int time_embed_dim = 128;
    OutputParam output = OutputParam::Noise;
    /// Oracle only: spectrum along a random basis and the mean scale.
    std::vector<double> oracle_eigenvalues;
    double oracle_mean_scale = 0.0;

    bool operator==(const ModelConfig&) const = default;
};

struct EstimatorConfig {
    std::vector<std::string> selected = {"flipd_auto"};
    /// "auto" (exact up to D = 100), "exact" or "hutchinson".
    std::string trace = "auto";
    int hutchinson_samples = 50;
    ProbeNoise probe_noise = ProbeNoise::Rademacher;

    double flipd_t0 = 0.05;
    int curve_points = 50;
    double knee_sensitivity = 1.0;
    KneeShape knee_shape = KneeShape::ConvexDecreasing;
    double fallback_t0 = 0.05;

    std::vector<double> lidl_scales = {0.01, 0.014, 0.019, 0.027, 0.037, 0.052, 0.072, 0.1};
    int lidl_rk_steps = 16;

    double nb_t0 = 0.01;
    int nb_columns = 0;
    NbThreshold nb_threshold = NbThreshold::MaxGap;
    int nb_num_tau = 100;
    double nb_tau_min = 1e-3;
    double nb_tau_max = 1000.0;

    /// Neighbour count for LPCA / MLE; 0 means 100, or 1000 when D > 100.
    int knn_k = 0;
    double lpca_alpha = 0.05;

    /// Evaluation subsample size (all points when the dataset is smaller).
    Eigen::Index subsample = 4096;
    /// Dataset indices whose FLIPD curve the report writes out; empty means
    /// the first point of every component.
    std::vector<Eigen::Index> curve_indices;
    ConcordanceVariant concordance = ConcordanceVariant::Literal;

    bool operator==(const EstimatorConfig&) const = default;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    Schedule schedule = Schedule::vp();
    ModelConfig model;
    TrainConfig train;
    EstimatorConfig estimators;
    std::string output_dir = "run";
    std::uint64_t seed = 0;

    /// Cross-module validation; throws ValidationError.
    void validate() const;

    /// Derived per-purpose seeds.
    std::uint64_t dataset_seed() const;
    std::uint64_t init_seed() const;
    std::uint64_t train_seed() const;
    std::uint64_t estimator_seed() const;
    std::uint64_t subsample_seed() const;

    Eigen::Index ambient_dim() const;
    ManifoldSpec manifold_spec() const;
    TraceMode trace_mode() const;
    AutoConfig auto_config() const;
    NbConfig nb_config() const;
    DeltaGrid delta_grid() const;
    MlpArchitecture architecture() const;
    TrainConfig train_config() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Strict: unknown keys and wrong types are validation errors.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& cfg);

/// FNV-1a 64-bit hash of the canonical (sorted-key, compact) JSON form, as hex.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace lid
