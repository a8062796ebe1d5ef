#include "lid/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lid/errors.hpp"

namespace lid {

std::string to_string(Weighting w) { return w == Weighting::Likelihood ? "likelihood" : "uniform"; }

Weighting weighting_from_string(const std::string& name)
{
    if (name == "likelihood") return Weighting::Likelihood;
    if (name == "uniform") return Weighting::Uniform;
    throw ValidationError("unknown loss weighting '" + name + "'");
}

void TrainConfig::validate() const
{
    if (!(lr > 0.0)) throw ValidationError("learning rate must be positive");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!(t_min > 0.0 && t_min < 1.0)) throw ValidationError("t_min must lie in (0, 1)");
    if (t_min < kTimeFloor) throw ValidationError("t_min is below the score evaluation floor");
    if (epochs && *epochs < 0) throw ValidationError("epochs must be nonnegative");
    if (warmup_steps < 0) throw ValidationError("warmup_steps must be nonnegative");
    if (weight_decay < 0.0) throw ValidationError("weight_decay must be nonnegative");
}

int default_epochs(Eigen::Index ambient)
{
    if (ambient <= 10) return 200;
    if (ambient <= 100) return 400;
    if (ambient <= 800) return 800;
    return 1000;
}

double loss_weight(const Schedule& sched, Weighting weighting, double t)
{
    if (weighting == Weighting::Likelihood) return 0.5 * sched.drift_diffusion(t).diffusion2;
    return sched.sigma2(t);
}

NoiseDraw draw_noise(Eigen::Index dim, Eigen::Index count, double t_min, Rng& rng)
{
    std::uniform_real_distribution<double> uniform(t_min, 1.0);
    NoiseDraw draw;
    draw.times.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) draw.times[i] = uniform(rng);
    draw.noise = standard_normal(dim, count, rng);
    return draw;
}

namespace {

void check_batch(Eigen::Index dim, const Eigen::MatrixXd& batch, const NoiseDraw& draw)
{
    if (batch.cols() < 1) throw ValidationError("dsm_loss needs a nonempty batch");
    if (batch.rows() != dim) throw ValidationError("batch dimension does not match the model");
    if (draw.times.size() != batch.cols() || draw.noise.cols() != batch.cols() || draw.noise.rows() != dim)
        throw ValidationError("noise draw does not match the batch");
}

[[noreturn]] void report_non_finite(double t)
{
    std::ostringstream os;
    os << "non-finite denoising loss at t = " << t;
    throw NumericError(os.str());
}

}  // namespace

double dsm_loss(const ScoreModel& model, const Schedule& sched, const Eigen::MatrixXd& batch, const NoiseDraw& draw,
                Weighting weighting)
{
    check_batch(model.dim(), batch, draw);
    double total = 0.0;
    for (Eigen::Index i = 0; i < batch.cols(); ++i) {
        const double t = draw.times[i];
        const double sig = sched.sigma(t);
        const Eigen::VectorXd noised = sched.psi(t) * batch.col(i) + sig * draw.noise.col(i);
        const Eigen::VectorXd residual = score(model, noised, t) + draw.noise.col(i) / sig;
        const double term = loss_weight(sched, weighting, t) * residual.squaredNorm();
        if (!std::isfinite(term)) report_non_finite(t);
        total += term;
    }
    return total / static_cast<double>(batch.cols());
}

double dsm_loss(const ScoreModel& model, const Schedule& sched, const Eigen::MatrixXd& batch, Rng& rng,
                Weighting weighting, double t_min)
{
    return dsm_loss(model, sched, batch, draw_noise(batch.rows(), batch.cols(), t_min, rng), weighting);
}

double dsm_loss_mlp(const MlpScore& model, const Eigen::MatrixXd& batch, const NoiseDraw& draw, Weighting weighting,
                    std::vector<MlpScore::Layer>* grads)
{
    check_batch(model.dim(), batch, draw);
    const auto& sched = model.schedule();
    const Eigen::Index n = batch.cols();

    Eigen::VectorXd psi(n), sig(n), weight(n), scale(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = draw.times[i];
        psi[i] = sched.psi(t);
        sig[i] = sched.sigma(t);
        weight[i] = loss_weight(sched, weighting, t);
        scale[i] = model.output_scale(t);
    }
    const Eigen::MatrixXd noised = batch * psi.asDiagonal() + draw.noise * sig.asDiagonal();

    MlpScore::Cache cache;
    const Eigen::MatrixXd out = model.forward(noised, draw.times, grads ? &cache : nullptr);
    // residual = c(t) out + eps / sigma
    const Eigen::MatrixXd residual = out * scale.asDiagonal() + draw.noise * sig.cwiseInverse().asDiagonal();
    const Eigen::VectorXd per_sample = residual.colwise().squaredNorm().transpose().cwiseProduct(weight);
    for (Eigen::Index i = 0; i < n; ++i)
        if (!std::isfinite(per_sample[i])) report_non_finite(draw.times[i]);
    const double loss = per_sample.sum() / static_cast<double>(n);

    if (grads) {
        const Eigen::VectorXd coef = (2.0 / static_cast<double>(n)) * weight.cwiseProduct(scale);
        model.backward(cache, residual * coef.asDiagonal(), *grads);
    }
    return loss;
}

double scheduled_lr(double base_lr, long step, long warmup, long total)
{
    if (step < warmup) return base_lr * static_cast<double>(step) / static_cast<double>(std::max(1L, warmup));
    const double progress =
        static_cast<double>(step - warmup) / static_cast<double>(std::max(1L, total - warmup));
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(1.0, progress)));
}

namespace {

struct AdamState {
    std::vector<MlpScore::Layer> m;
    std::vector<MlpScore::Layer> v;
};

template <class Param, class Grad>
void adamw_update(Param& p, const Grad& g, Param& m, Param& v, double lr, const TrainConfig& cfg, double bc1, double bc2)
{
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
    p -= lr * cfg.weight_decay * p;
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.adam_eps);
}

}  // namespace

TrainResult train(MlpScore model, const Eigen::MatrixXd& data, const TrainConfig& cfg, const EpochCallback& on_epoch)
{
    cfg.validate();
    if (data.rows() != model.dim()) throw ValidationError("dataset dimension does not match the model");
    if (data.cols() < 1) throw ValidationError("dataset is empty");

    const int epochs = cfg.epochs.value_or(default_epochs(model.dim()));
    const Eigen::Index n = data.cols();
    const Eigen::Index batch_size = std::min<Eigen::Index>(cfg.batch_size, n);
    const long batches_per_epoch = static_cast<long>((n + batch_size - 1) / batch_size);
    const long total_steps = batches_per_epoch * epochs;

    TrainResult result{std::move(model), {}};
    auto& net = result.model;
    AdamState adam{net.zero_like(), net.zero_like()};
    auto grads = net.zero_like();

    std::vector<Eigen::Index> order(n);
    long step = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        auto rng = make_rng(cfg.seed, {0x7a11, static_cast<std::uint64_t>(epoch)});
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_total = 0.0;
        for (Eigen::Index start = 0; start < n; start += batch_size) {
            const Eigen::Index count = std::min(batch_size, n - start);
            Eigen::MatrixXd batch(data.rows(), count);
            for (Eigen::Index i = 0; i < count; ++i) batch.col(i) = data.col(order[start + i]);
            const NoiseDraw draw = draw_noise(data.rows(), count, cfg.t_min, rng);

            for (auto& g : grads) {
                g.weight.setZero();
                g.bias.setZero();
            }
            const double loss = dsm_loss_mlp(net, batch, draw, cfg.weighting, &grads);
            epoch_total += loss * static_cast<double>(count);

            ++step;
            const double lr = scheduled_lr(cfg.lr, step, cfg.warmup_steps, total_steps);
            const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            auto& layers = net.layers();
            for (std::size_t j = 0; j < layers.size(); ++j) {
                adamw_update(layers[j].weight, grads[j].weight, adam.m[j].weight, adam.v[j].weight, lr, cfg, bc1, bc2);
                adamw_update(layers[j].bias, grads[j].bias, adam.m[j].bias, adam.v[j].bias, lr, cfg, bc1, bc2);
            }
        }

        const double mean_loss = epoch_total / static_cast<double>(n);
        if (!std::isfinite(mean_loss) || mean_loss > cfg.divergence_threshold) {
            std::ostringstream os;
            os << "training diverged at epoch " << epoch << " (mean loss " << mean_loss << ")";
            throw NumericError(os.str());
        }
        result.loss_trace.push_back(mean_loss);
        if (on_epoch) on_epoch(epoch, mean_loss);
    }
    return result;
}

}  // namespace lid
