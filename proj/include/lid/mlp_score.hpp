#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "lid/schedule.hpp"
#include "lid/score_model.hpp"

namespace lid {

/// What the network's raw output represents.
enum class OutputParam : std::uint32_t {
    Score = 0,  ///< output is the score directly
    Noise = 1,  ///< output predicts the injected noise; score = -output / sigma(t)
};

struct MlpArchitecture {
    Eigen::Index input_dim = 0;
    /// Hidden widths h_1..h_n forming a bottleneck; n must be odd.
    std::vector<int> hidden = {256, 128, 64, 128, 256};
    int time_embed_dim = 128;
    OutputParam output = OutputParam::Noise;

    bool operator==(const MlpArchitecture&) const = default;
};

/// Sinusoidal features [sin(t w_k), cos(t w_k)] with w_k geometric from 1 to 1e4.
Eigen::MatrixXd time_embedding(const Eigen::VectorXd& times, int dim);

/// Fully connected bottleneck network with U-Net style skip connections.
///
/// With n = 2L + 1 hidden layers, layers 1..L+1 form the contracting path.
/// Layer j > L+1 reads the concatenation of layer j-1 and its mirror layer
/// n+1-j; the linear output layer reads layer n concatenated with the input
/// [x, embed(t)]. All hidden layers use SiLU.
class MlpScore final : public ScoreModel {
public:
    struct Layer {
        Eigen::MatrixXd weight;  // out x in
        Eigen::VectorXd bias;
    };

    /// Activations kept by forward() for backpropagation.
    struct Cache {
        std::vector<Eigen::MatrixXd> pre;   // pre-activations, one per hidden layer
        std::vector<Eigen::MatrixXd> post;  // post[0] is the input, post[j] layer j
        Eigen::MatrixXd output;
    };

    MlpScore(MlpArchitecture arch, Schedule sched);

    /// Fan-in scaled Gaussian weights, zero biases, zero output layer.
    void init_random(std::uint64_t seed);
    void init_zero();

    const MlpArchitecture& architecture() const { return arch_; }
    const Schedule& schedule() const { return sched_; }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    Eigen::Index dim() const override { return arch_.input_dim; }
    Eigen::Index parameter_count() const;
    Eigen::VectorXd flat_parameters() const;
    void set_flat_parameters(const Eigen::VectorXd& flat);

    /// Raw network output for per-column times (no score conversion).
    Eigen::MatrixXd forward(const Eigen::MatrixXd& points, const Eigen::VectorXd& times,
                            Cache* cache = nullptr) const;
    /// Accumulates d(loss)/d(parameters) into `grads` given d(loss)/d(output).
    void backward(const Cache& cache, const Eigen::MatrixXd& output_grad, std::vector<Layer>& grads) const;
    std::vector<Layer> zero_like() const;

    /// Multiplier c(t) with score = c(t) * output.
    double output_scale(double t) const;

    Eigen::MatrixXd score_batch(const Eigen::MatrixXd& points, double t) const override;
    ScoreWithJvp score_with_jvp(const Eigen::VectorXd& x, double t,
                                const Eigen::MatrixXd& directions) const override;

    /// Checkpoint: "FLPD" magic, version, D, hidden widths, time embedding
    /// size, output parameterization, schedule, then little-endian f64 blocks
    /// (row-major weight, bias) in layer order.
    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static MlpScore load(std::istream& in);
    static MlpScore load(const std::filesystem::path& path);

private:
    int hidden_count() const { return static_cast<int>(arch_.hidden.size()); }
    int contracting_count() const { return hidden_count() / 2 + 1; }
    /// Index of the skip source feeding hidden layer j (1-based), or -1.
    int skip_source(int j) const;

    MlpArchitecture arch_;
    Schedule sched_;
    std::vector<Layer> layers_;  // hidden layers followed by the output layer
};

}  // namespace lid
