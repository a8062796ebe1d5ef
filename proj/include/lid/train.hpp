#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lid/mlp_score.hpp"
#include "lid/rng.hpp"
#include "lid/schedule.hpp"
#include "lid/score_model.hpp"

namespace lid {

enum class Weighting {
    Likelihood,  ///< w(t) = g^2(t) / 2
    Uniform,     ///< w(t) = sigma^2(t)
};

std::string to_string(Weighting w);
Weighting weighting_from_string(const std::string& name);

struct TrainConfig {
    double lr = 1e-4;
    /// Unset means default_epochs(D).
    std::optional<int> epochs;
    int batch_size = 128;
    int warmup_steps = 500;
    Weighting weighting = Weighting::Likelihood;
    /// Diffusion times are drawn from U(t_min, 1).
    double t_min = 1e-4;
    double weight_decay = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    /// An epoch whose mean loss exceeds this aborts training.
    double divergence_threshold = 1e6;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

/// 200 epochs for D <= 10, 400 for D <= 100, 800 for D <= 800, 1000 otherwise.
int default_epochs(Eigen::Index ambient);

double loss_weight(const Schedule& sched, Weighting weighting, double t);

/// Frozen per-sample draws (t_i, eps_i) for one batch.
struct NoiseDraw {
    Eigen::VectorXd times;
    Eigen::MatrixXd noise;  // D x n
};

NoiseDraw draw_noise(Eigen::Index dim, Eigen::Index count, double t_min, Rng& rng);

/// Denoising score matching loss, mean_i w(t_i) ||s(x_i(t_i), t_i) + eps_i / sigma(t_i)||^2
/// with x_i(t) = psi(t) x_i + sigma(t) eps_i. Works for any score model
/// (one evaluation per sample).
double dsm_loss(const ScoreModel& model, const Schedule& sched, const Eigen::MatrixXd& batch, const NoiseDraw& draw,
                Weighting weighting);
double dsm_loss(const ScoreModel& model, const Schedule& sched, const Eigen::MatrixXd& batch, Rng& rng,
                Weighting weighting, double t_min = 1e-4);

/// Batched loss for an MLP, optionally accumulating the weight gradient.
double dsm_loss_mlp(const MlpScore& model, const Eigen::MatrixXd& batch, const NoiseDraw& draw, Weighting weighting,
                    std::vector<MlpScore::Layer>* grads = nullptr);

/// Learning rate after `step` optimizer updates: linear warmup then cosine decay to zero.
double scheduled_lr(double base_lr, long step, long warmup, long total);

struct TrainResult {
    MlpScore model;
    /// Mean loss per epoch.
    std::vector<double> loss_trace;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/// AdamW on the DSM loss. `data` holds one point per column. Deterministic for a fixed seed.
TrainResult train(MlpScore model, const Eigen::MatrixXd& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace lid
