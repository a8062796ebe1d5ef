#include "lid/gaussian_oracle.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "lid/errors.hpp"
#include "lid/rng.hpp"

namespace lid {

Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::uint64_t seed)
{
    auto rng = make_rng(seed, {0x0e7});
    const Eigen::MatrixXd g = standard_normal(n, n, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    return q;
}

GaussianOracle::GaussianOracle(Eigen::VectorXd mean, Eigen::MatrixXd eigenvectors, Eigen::VectorXd eigenvalues,
                               Schedule sched)
    : mean_(std::move(mean)), eigenvectors_(std::move(eigenvectors)), eigenvalues_(std::move(eigenvalues)),
      sched_(sched)
{
    const Eigen::Index d = mean_.size();
    if (eigenvectors_.rows() != d || eigenvectors_.cols() != d || eigenvalues_.size() != d)
        throw ValidationError("oracle mean, eigenvectors and eigenvalues disagree in size");
    if ((eigenvalues_.array() < 0.0).any()) throw ValidationError("covariance eigenvalues must be nonnegative");
    const double err = (eigenvectors_.transpose() * eigenvectors_ - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
    if (err > 1e-10) throw ValidationError("oracle eigenvectors are not orthonormal");
}

GaussianOracle GaussianOracle::isotropic(Eigen::Index dim, const Schedule& sched)
{
    return {Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Ones(dim), sched};
}

GaussianOracle GaussianOracle::random_rotation(const Eigen::VectorXd& eigenvalues, const Schedule& sched,
                                               std::uint64_t seed, double mean_scale)
{
    const Eigen::Index d = eigenvalues.size();
    auto rng = make_rng(seed, {0x3ea9});
    Eigen::VectorXd mean = standard_normal(d, rng) * mean_scale;
    return {std::move(mean), random_orthogonal(d, seed), eigenvalues, sched};
}

GaussianOracle GaussianOracle::affine(Eigen::Index ambient, Eigen::Index intrinsic, const Schedule& sched,
                                      std::uint64_t seed)
{
    if (intrinsic < 0 || intrinsic > ambient) throw ValidationError("intrinsic dimension must lie in [0, D]");
    Eigen::VectorXd ev = Eigen::VectorXd::Zero(ambient);
    ev.head(intrinsic).setOnes();
    return random_rotation(ev, sched, seed);
}

Eigen::VectorXd GaussianOracle::precision_spectrum(double t) const
{
    const double psi2 = std::pow(sched_.psi(t), 2);
    const double s2 = sched_.sigma2(t);
    return (psi2 * eigenvalues_.array() + s2).inverse();
}

Eigen::MatrixXd GaussianOracle::score_batch(const Eigen::MatrixXd& points, double t) const
{
    check_query(points.rows(), t);
    const Eigen::VectorXd prec = precision_spectrum(t);
    const Eigen::MatrixXd centered = points.colwise() - sched_.psi(t) * mean_;
    return -eigenvectors_ * (prec.asDiagonal() * (eigenvectors_.transpose() * centered));
}

ScoreWithJvp GaussianOracle::score_with_jvp(const Eigen::VectorXd& x, double t, const Eigen::MatrixXd& directions) const
{
    check_query(x.size(), t);
    if (directions.rows() != x.size()) throw ValidationError("direction dimension mismatch");
    const Eigen::VectorXd prec = precision_spectrum(t);
    ScoreWithJvp out;
    out.score = -eigenvectors_ * (prec.asDiagonal() * (eigenvectors_.transpose() * (x - sched_.psi(t) * mean_)));
    out.jvp = -eigenvectors_ * (prec.asDiagonal() * (eigenvectors_.transpose() * directions));
    return out;
}

double GaussianOracle::log_gaussian(const Eigen::VectorXd& centered, const Eigen::VectorXd& variances) const
{
    const Eigen::VectorXd coords = eigenvectors_.transpose() * centered;
    const double d = static_cast<double>(centered.size());
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + variances.array().log().sum() +
                   (coords.array().square() / variances.array()).sum());
}

double GaussianOracle::log_density(const Eigen::VectorXd& x, double t) const
{
    const double psi = sched_.psi(t);
    const Eigen::VectorXd variances = (psi * psi * eigenvalues_.array() + sched_.sigma2(t)).matrix();
    return log_gaussian(x - psi * mean_, variances);
}

double GaussianOracle::log_convolved(const Eigen::VectorXd& x, double delta) const
{
    const Eigen::VectorXd variances = (eigenvalues_.array() + std::exp(2.0 * delta)).matrix();
    return log_gaussian(x - mean_, variances);
}

Eigen::VectorXd GaussianOracle::point_on_support(const Eigen::VectorXd& tangent_coords) const
{
    Eigen::VectorXd out = mean_;
    Eigen::Index used = 0;
    for (Eigen::Index i = 0; i < eigenvalues_.size() && used < tangent_coords.size(); ++i) {
        if (eigenvalues_[i] > 0.0) out += std::sqrt(eigenvalues_[i]) * tangent_coords[used++] * eigenvectors_.col(i);
    }
    return out;
}

}  // namespace lid
