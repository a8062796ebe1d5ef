#include "lid/bench.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/QR>

#include "lid/errors.hpp"
#include "lid/gaussian_oracle.hpp"
#include "lid/rng.hpp"

namespace lid {

std::string to_string(BaseDistribution base)
{
    switch (base) {
    case BaseDistribution::Uniform: return "uniform";
    case BaseDistribution::Gaussian: return "gaussian";
    case BaseDistribution::Laplace: return "laplace";
    }
    return "?";
}

BaseDistribution base_distribution_from_string(const std::string& name)
{
    if (name == "uniform") return BaseDistribution::Uniform;
    if (name == "gaussian") return BaseDistribution::Gaussian;
    if (name == "laplace") return BaseDistribution::Laplace;
    throw ValidationError("unknown base distribution '" + name + "'");
}

void ManifoldSpec::validate() const
{
    if (ambient_dim < 1) throw ValidationError("ambient dimension must be >= 1");
    if (components.empty()) throw ValidationError("manifold spec has no components");
    for (const auto& c : components) {
        if (c.intrinsic_dim < 1 || c.intrinsic_dim > ambient_dim)
            throw ValidationError("component intrinsic dimension " + std::to_string(c.intrinsic_dim) +
                                  " outside [1, " + std::to_string(ambient_dim) + "]");
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw ValidationError("component weights must be positive");
    }
    if (!(mode_separation >= 0.0)) throw ValidationError("mode separation must be nonnegative");
}

namespace {

std::vector<Eigen::Index> multinomial_counts(const std::vector<double>& weights, Eigen::Index n, Rng& rng)
{
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::vector<Eigen::Index> counts(weights.size(), 0);
    for (Eigen::Index i = 0; i < n; ++i) ++counts[pick(rng)];
    return counts;
}

Eigen::MatrixXd sample_base(BaseDistribution base, int d, Eigen::Index m, Rng& rng)
{
    Eigen::MatrixXd z(d, m);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> expo(1.0);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (int i = 0; i < d; ++i) {
            switch (base) {
            case BaseDistribution::Uniform: z(i, j) = uniform(rng); break;
            case BaseDistribution::Gaussian: z(i, j) = normal(rng); break;
            case BaseDistribution::Laplace: z(i, j) = expo(rng) - expo(rng); break;
            }
        }
    }
    return z;
}

void append_columns(LabeledDataset& ds, const Eigen::MatrixXd& block, int label, int component)
{
    const Eigen::Index start = ds.points.cols();
    ds.points.conservativeResize(block.rows(), start + block.cols());
    ds.points.middleCols(start, block.cols()) = block;
    ds.lid_labels.insert(ds.lid_labels.end(), static_cast<std::size_t>(block.cols()), label);
    ds.component_ids.insert(ds.component_ids.end(), static_cast<std::size_t>(block.cols()), component);
}

}  // namespace

std::vector<Eigen::VectorXd> place_modes(int count, int ambient, double separation, std::uint64_t seed)
{
    auto rng = make_rng(seed, {0x6d6f6465});
    std::vector<Eigen::VectorXd> modes;
    int rejected = 0;
    while (static_cast<int>(modes.size()) < count) {
        const Eigen::VectorXd candidate = separation * standard_normal(ambient, rng);
        bool ok = true;
        for (const auto& m : modes)
            if ((m - candidate).norm() < separation) {
                ok = false;
                break;
            }
        if (ok) {
            modes.push_back(candidate);
        } else if (++rejected >= 10000) {
            throw ValidationError("could not place " + std::to_string(count) + " modes at separation " +
                                  std::to_string(separation) + " after 10^4 rejections");
        }
    }
    return modes;
}

double affine_residual(const AffineFrame& frame, const Eigen::VectorXd& x)
{
    const Eigen::VectorXd rel = x - frame.origin;
    return (rel - frame.basis * (frame.basis.transpose() * rel)).norm();
}

LabeledDataset generate(const ManifoldSpec& spec, Eigen::Index n)
{
    spec.validate();
    const auto n_comp = static_cast<Eigen::Index>(spec.components.size());
    if (n < n_comp) throw ValidationError("need at least one point per component");

    const int dim = spec.ambient_dim;
    std::vector<double> weights;
    for (const auto& c : spec.components) weights.push_back(c.weight);
    auto count_rng = make_rng(spec.seed, {0x636e74});
    const auto counts = multinomial_counts(weights, n, count_rng);
    const auto modes = place_modes(static_cast<int>(n_comp), dim, spec.mode_separation, spec.seed);

    LabeledDataset ds;
    ds.points.resize(dim, 0);
    for (Eigen::Index c = 0; c < n_comp; ++c) {
        const auto& comp = spec.components[static_cast<std::size_t>(c)];
        const int d = comp.intrinsic_dim;
        const Eigen::Index m = counts[static_cast<std::size_t>(c)];
        auto rng = make_rng(spec.seed, {0x636f6d70, static_cast<std::uint64_t>(c)});
        const Eigen::MatrixXd rotation = random_orthogonal(dim, stream_key(spec.seed, {0x726f74, static_cast<std::uint64_t>(c)}));
        const Eigen::MatrixXd span = rotation.leftCols(d);

        Eigen::MatrixXd block = span * sample_base(comp.base, d, m, rng);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
        Eigen::VectorXd scale = Eigen::VectorXd::Ones(dim);
        if (m > 0) mean = block.rowwise().mean();
        if (m > 1) {
            const Eigen::MatrixXd centered = block.colwise() - mean;
            scale = (centered.rowwise().squaredNorm() / static_cast<double>(m - 1)).cwiseSqrt();
            for (Eigen::Index i = 0; i < dim; ++i)
                if (!(scale[i] > 1e-12)) scale[i] = 1.0;
        }
        const Eigen::VectorXd inv_scale = scale.cwiseInverse();
        block = (inv_scale.asDiagonal() * (block.colwise() - mean)).colwise() + modes[static_cast<std::size_t>(c)];

        AffineFrame frame;
        frame.origin = modes[static_cast<std::size_t>(c)] - inv_scale.cwiseProduct(mean);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(inv_scale.asDiagonal() * span);
        frame.basis = qr.householderQ() * Eigen::MatrixXd::Identity(dim, d);
        ds.frames.push_back(std::move(frame));

        append_columns(ds, block, d, static_cast<int>(c));
    }
    return ds;
}

LabeledDataset lollipop(Eigen::Index n, std::uint64_t seed)
{
    if (n < 3) throw ValidationError("lollipop needs at least 3 points");
    auto rng = make_rng(seed, {0x6c6f6c});
    const auto counts = multinomial_counts({1.0, 1.0, 1.0}, n, rng);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    LabeledDataset ds;
    ds.points.resize(2, 0);
    Eigen::MatrixXd candy(2, counts[0]);
    for (Eigen::Index j = 0; j < counts[0]; ++j) {
        const double r = std::sqrt(uniform(rng));
        const double a = 2.0 * std::numbers::pi * uniform(rng);
        candy.col(j) << 3.0 + r * std::cos(a), 3.0 + r * std::sin(a);
    }
    Eigen::MatrixXd stick(2, counts[1]);
    for (Eigen::Index j = 0; j < counts[1]; ++j) {
        const double s = 2.0 * uniform(rng);
        stick.col(j) << s, s;
    }
    Eigen::MatrixXd dot(2, counts[2]);
    dot.row(0).setConstant(4.0);
    dot.row(1).setConstant(1.0);
    append_columns(ds, candy, 2, 0);
    append_columns(ds, stick, 1, 1);
    append_columns(ds, dot, 0, 2);
    return ds;
}

LabeledDataset swiss_roll(Eigen::Index n, std::uint64_t seed)
{
    if (n < 1) throw ValidationError("swiss roll needs at least one point");
    auto rng = make_rng(seed, {0x7377});
    std::uniform_real_distribution<double> angle(1.5 * std::numbers::pi, 4.5 * std::numbers::pi);
    std::uniform_real_distribution<double> height(0.0, 21.0);
    Eigen::MatrixXd pts(3, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double u = angle(rng);
        pts.col(j) << u * std::cos(u), height(rng), u * std::sin(u);
    }
    LabeledDataset ds;
    ds.points.resize(3, 0);
    append_columns(ds, pts, 2, 0);
    return ds;
}

LabeledDataset string_in_doughnut(Eigen::Index n, std::uint64_t seed)
{
    if (n < 2) throw ValidationError("string-in-doughnut needs at least 2 points");
    constexpr double major = 10.0;
    constexpr double minor = 1.0;
    auto rng = make_rng(seed, {0x646f});
    const auto counts = multinomial_counts({1.0, 1.0}, n, rng);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    Eigen::MatrixXd torus(3, counts[0]);
    for (Eigen::Index j = 0; j < counts[0]; ++j) {
        // Area element is proportional to major + minor cos(v).
        double v = 0.0;
        do {
            v = angle(rng);
        } while (uniform(rng) * (major + minor) > major + minor * std::cos(v));
        const double u = angle(rng);
        const double ring = major + minor * std::cos(v);
        torus.col(j) << ring * std::cos(u), ring * std::sin(u), minor * std::sin(v);
    }
    Eigen::MatrixXd circle(3, counts[1]);
    for (Eigen::Index j = 0; j < counts[1]; ++j) {
        const double u = angle(rng);
        circle.col(j) << major * std::cos(u), major * std::sin(u), 0.0;
    }
    LabeledDataset ds;
    ds.points.resize(3, 0);
    append_columns(ds, torus, 2, 0);
    append_columns(ds, circle, 1, 1);
    return ds;
}

LabeledDataset toy_dataset(const std::string& name, Eigen::Index n, std::uint64_t seed)
{
    if (name == "lollipop") return lollipop(n, seed);
    if (name == "swiss_roll") return swiss_roll(n, seed);
    if (name == "string_in_doughnut") return string_in_doughnut(n, seed);
    throw ValidationError("unknown toy manifold '" + name + "'");
}

}  // namespace lid
