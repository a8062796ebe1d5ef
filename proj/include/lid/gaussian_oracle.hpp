#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "lid/schedule.hpp"
#include "lid/score_model.hpp"

namespace lid {

/// Exact score of p(., t) when the data distribution is N(mean, U diag(ev) U^T).
///
/// The diffused marginal is N(psi mean, psi^2 Sigma + sigma^2 I), which stays
/// full rank for sigma(t) > 0 even when Sigma is singular.
class GaussianOracle final : public ScoreModel {
public:
    GaussianOracle(Eigen::VectorXd mean, Eigen::MatrixXd eigenvectors, Eigen::VectorXd eigenvalues, Schedule sched);

    /// Isotropic N(mean, I) in R^D with the standard basis as eigenvectors.
    static GaussianOracle isotropic(Eigen::Index dim, const Schedule& sched);
    /// Gaussian with the given spectrum along a random orthonormal basis and a
    /// random mean (both seeded).
    static GaussianOracle random_rotation(const Eigen::VectorXd& eigenvalues, const Schedule& sched,
                                          std::uint64_t seed, double mean_scale = 1.0);
    /// Unit-variance Gaussian on a random d-dimensional affine subspace of R^D.
    static GaussianOracle affine(Eigen::Index ambient, Eigen::Index intrinsic, const Schedule& sched,
                                 std::uint64_t seed);

    Eigen::Index dim() const override { return mean_.size(); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Schedule& schedule() const { return sched_; }

    Eigen::MatrixXd score_batch(const Eigen::MatrixXd& points, double t) const override;
    ScoreWithJvp score_with_jvp(const Eigen::VectorXd& x, double t, const Eigen::MatrixXd& directions) const override;

    /// Closed-form log p(x, t).
    double log_density(const Eigen::VectorXd& x, double t) const;
    /// Closed-form log of the data density convolved with N(0, e^{2 delta} I).
    double log_convolved(const Eigen::VectorXd& x, double delta) const;

    /// A point on the support: mean + U * coords restricted to positive eigenvalues.
    Eigen::VectorXd point_on_support(const Eigen::VectorXd& tangent_coords) const;

private:
    /// Inverse eigenvalues of psi^2 Sigma + sigma^2 I at time t.
    Eigen::VectorXd precision_spectrum(double t) const;
    double log_gaussian(const Eigen::VectorXd& centered, const Eigen::VectorXd& variances) const;

    Eigen::VectorXd mean_;
    Eigen::MatrixXd eigenvectors_;
    Eigen::VectorXd eigenvalues_;
    Schedule sched_;
};

/// Random orthogonal matrix from the QR factorisation of a Gaussian matrix,
/// with column signs fixed so the distribution is Haar.
Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::uint64_t seed);

}  // namespace lid
