#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lid {

enum class BaseDistribution { Uniform, Gaussian, Laplace };

std::string to_string(BaseDistribution base);
BaseDistribution base_distribution_from_string(const std::string& name);

struct ComponentSpec {
    BaseDistribution base = BaseDistribution::Gaussian;
    int intrinsic_dim = 1;
    /// Relative mixture weight; weights are normalised by their sum.
    double weight = 1.0;

    bool operator==(const ComponentSpec&) const = default;
};

/// Mixture of standardized, randomly rotated d-dimensional base
/// distributions zero-padded into R^D, with well separated modes.
struct ManifoldSpec {
    std::vector<ComponentSpec> components;
    int ambient_dim = 0;
    double mode_separation = 20.0;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ManifoldSpec&) const = default;
};

/// The affine subspace a component lives on: origin + span(basis).
struct AffineFrame {
    Eigen::VectorXd origin;
    Eigen::MatrixXd basis;  // D x d, orthonormal columns
};

struct LabeledDataset {
    Eigen::MatrixXd points;  // D x n, one point per column
    std::vector<int> lid_labels;
    std::vector<int> component_ids;
    /// One frame per component for affine mixtures; empty for curved toys.
    std::vector<AffineFrame> frames;

    Eigen::Index size() const { return points.cols(); }
    Eigen::Index dim() const { return points.rows(); }
};

/// Points are grouped by component. Component sizes follow a multinomial draw
/// with the component weights; every component has its own random stream.
LabeledDataset generate(const ManifoldSpec& spec, Eigen::Index n);

/// Mode centres with all pairwise distances >= separation, by rejection from
/// N(0, separation^2 I). Throws after 10^4 rejected candidates.
std::vector<Eigen::VectorXd> place_modes(int count, int ambient, double separation, std::uint64_t seed);

/// Distance from `x` to the affine subspace of `frame`.
double affine_residual(const AffineFrame& frame, const Eigen::VectorXd& x);

/// Curved toy manifolds in low dimension.
/// Lollipop in R^2: disk of radius 1 centred at (3, 3) (LID 2), segment from
/// the origin to (2, 2) (LID 1), isolated point (4, 1) (LID 0).
LabeledDataset lollipop(Eigen::Index n, std::uint64_t seed);
/// Swiss roll in R^3: (u cos u, h, u sin u), u in [1.5 pi, 4.5 pi], h in [0, 21].
LabeledDataset swiss_roll(Eigen::Index n, std::uint64_t seed);
/// Torus (major radius 10, minor radius 1, uniform area measure; LID 2) and
/// its major circle (LID 1) in R^3.
LabeledDataset string_in_doughnut(Eigen::Index n, std::uint64_t seed);

LabeledDataset toy_dataset(const std::string& name, Eigen::Index n, std::uint64_t seed);

}  // namespace lid
