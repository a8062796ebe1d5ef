#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lid/bench.hpp"
#include "lid/errors.hpp"
#include "lid/gaussian_oracle.hpp"
#include "lid/metrics.hpp"
#include "lid/modelfree.hpp"
#include "lid/rng.hpp"

using namespace lid;

namespace {

ManifoldSpec three_gaussians()
{
    ManifoldSpec spec;
    spec.ambient_dim = 10;
    spec.seed = 11;
    for (int d : {2, 4, 8}) spec.components.push_back({BaseDistribution::Gaussian, d, 1.0});
    return spec;
}

/// Literal pairwise concordance by brute force over ordered pairs.
double literal_concordance(const std::vector<double>& est, const std::vector<double>& lab)
{
    const std::size_t n = est.size();
    double hits = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && lab[i] <= lab[j] && est[i] <= est[j]) hits += 1.0;
    return hits / (static_cast<double>(n) * (n - 1) / 2.0);
}

double harrell_concordance(const std::vector<double>& est, const std::vector<double>& lab)
{
    double hits = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i)
        for (std::size_t j = 0; j < est.size(); ++j)
            if (lab[i] < lab[j]) {
                pairs += 1.0;
                hits += est[i] < est[j] ? 1.0 : (est[i] == est[j] ? 0.5 : 0.0);
            }
    return hits / pairs;
}

}  // namespace

TEST_CASE("single uniform plane in R^3")
{
    ManifoldSpec spec;
    spec.ambient_dim = 3;
    spec.components = {{BaseDistribution::Uniform, 2, 1.0}};
    spec.seed = 4;
    const auto ds = generate(spec, 2000);
    CHECK(ds.size() == 2000);
    REQUIRE(ds.frames.size() == 1);
    for (Eigen::Index j = 0; j < ds.size(); ++j) CHECK(affine_residual(ds.frames[0], ds.points.col(j)) < 1e-9);
    NeighborIndex index(ds.points, 100);
    CHECK(lpca_estimate(index, ds.points.col(17)) == 2);
}

TEST_CASE("three Gaussians in R^10")
{
    const auto spec = three_gaussians();
    const auto ds = generate(spec, 30000);
    CHECK(ds.dim() == 10);
    CHECK(std::set<int>(ds.lid_labels.begin(), ds.lid_labels.end()) == std::set<int>{2, 4, 8});

    // Components are grouped, centred on their modes and standardized.
    std::vector<Eigen::VectorXd> centres;
    for (int c = 0; c < 3; ++c) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < ds.size(); ++j)
            if (ds.component_ids[j] == c) idx.push_back(j);
        REQUIRE(!idx.empty());
        CHECK(std::is_sorted(idx.begin(), idx.end()));
        CHECK(idx.back() - idx.front() + 1 == static_cast<Eigen::Index>(idx.size()));
        // Multinomial sizes with equal weights: within 5 standard deviations of n / 3.
        CHECK(std::abs(static_cast<double>(idx.size()) - 10000.0) < 5 * std::sqrt(30000.0 * 2.0 / 9.0));
        const Eigen::MatrixXd block = ds.points.middleCols(idx.front(), idx.size());
        const Eigen::VectorXd mean = block.rowwise().mean();
        centres.push_back(mean);
        CHECK((mean - place_modes(3, 10, 20.0, spec.seed)[c]).norm() < 1e-9);
        CHECK(affine_residual(ds.frames[c], mean) < 1e-9);
        const Eigen::MatrixXd centred = block.colwise() - mean;
        const Eigen::VectorXd var = centred.rowwise().squaredNorm() / static_cast<double>(block.cols() - 1);
        for (Eigen::Index r = 0; r < var.size(); ++r) CHECK(var[r] == doctest::Approx(1.0).epsilon(1e-9));
        for (Eigen::Index j = 0; j < block.cols(); j += 97) CHECK(affine_residual(ds.frames[c], block.col(j)) < 1e-9);
        CHECK((ds.frames[c].basis.transpose() * ds.frames[c].basis - Eigen::MatrixXd::Identity(ds.frames[c].basis.cols(), ds.frames[c].basis.cols())).norm() < 1e-10);
    }
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) CHECK((centres[a] - centres[b]).norm() >= 20.0);
}

TEST_CASE("generation is deterministic and seed dependent")
{
    auto spec = three_gaussians();
    const auto a = generate(spec, 5000);
    const auto b = generate(spec, 5000);
    CHECK(a.points == b.points);
    CHECK(a.lid_labels == b.lid_labels);
    spec.seed = 12;
    CHECK(generate(spec, 5000).points != a.points);
}

TEST_CASE("laplace and uniform bases, unequal weights")
{
    ManifoldSpec spec;
    spec.ambient_dim = 6;
    spec.seed = 3;
    spec.components = {{BaseDistribution::Laplace, 3, 3.0}, {BaseDistribution::Uniform, 5, 1.0}};
    const auto ds = generate(spec, 20000);
    const auto n0 = std::count(ds.component_ids.begin(), ds.component_ids.end(), 0);
    CHECK(std::abs(n0 - 15000.0) < 5 * std::sqrt(20000.0 * 0.75 * 0.25));
    for (Eigen::Index j = 0; j < ds.size(); j += 13)
        CHECK(affine_residual(ds.frames[ds.component_ids[j]], ds.points.col(j)) < 1e-9);
}

TEST_CASE("spec validation and infeasible mode placement")
{
    auto spec = three_gaussians();
    spec.components[2].intrinsic_dim = 11;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    CHECK_THROWS_AS(generate(spec, 100), ValidationError);
    spec = three_gaussians();
    spec.components[0].intrinsic_dim = 0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = three_gaussians();
    spec.components[1].weight = 0.0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    CHECK_THROWS_AS(generate(three_gaussians(), 2), ValidationError);
    CHECK_THROWS_AS(place_modes(60, 1, 20.0, 1), ValidationError);
    const auto modes = place_modes(5, 4, 20.0, 2);
    for (std::size_t a = 0; a < modes.size(); ++a)
        for (std::size_t b = a + 1; b < modes.size(); ++b) CHECK((modes[a] - modes[b]).norm() >= 20.0);
}

TEST_CASE("rigid motions change no label and no model-free estimate")
{
    const auto ds = generate(three_gaussians(), 3000);
    const Eigen::MatrixXd Q = random_orthogonal(10, 5);
    CHECK((Q.transpose() * Q - Eigen::MatrixXd::Identity(10, 10)).norm() < 1e-10);
    auto rng = make_rng(6);
    const Eigen::VectorXd shift = 5.0 * standard_normal(10, rng);
    const Eigen::MatrixXd moved = (Q * ds.points).colwise() + shift;
    NeighborIndex a(ds.points, 50), b(moved, 50);
    for (Eigen::Index j = 0; j < ds.size(); j += 301) {
        CHECK(lpca_estimate(a, ds.points.col(j)) == lpca_estimate(b, moved.col(j)));
        CHECK(mle_estimate(a, ds.points.col(j)).lid ==
              doctest::Approx(mle_estimate(b, moved.col(j)).lid).epsilon(1e-8));
    }
}

TEST_CASE("toy manifolds")
{
    SUBCASE("lollipop")
    {
        const auto ds = lollipop(3000, 1);
        CHECK(ds.dim() == 2);
        for (Eigen::Index j = 0; j < ds.size(); ++j) {
            const Eigen::Vector2d p = ds.points.col(j);
            switch (ds.lid_labels[j]) {
            case 2: CHECK((p - Eigen::Vector2d(3, 3)).norm() <= 1.0); break;
            case 1:
                CHECK(p[0] == p[1]);
                CHECK(p[0] >= 0.0);
                CHECK(p[0] <= 2.0);
                break;
            case 0: CHECK(p == Eigen::Vector2d(4, 1)); break;
            default: FAIL("unexpected label");
            }
        }
    }
    SUBCASE("swiss roll")
    {
        const auto ds = swiss_roll(2000, 2);
        CHECK(ds.dim() == 3);
        for (Eigen::Index j = 0; j < ds.size(); ++j) {
            const double u = std::hypot(ds.points(0, j), ds.points(2, j));
            CHECK(u >= 1.5 * std::numbers::pi - 1e-9);
            CHECK(u <= 4.5 * std::numbers::pi + 1e-9);
            CHECK(ds.points(1, j) >= 0.0);
            CHECK(ds.points(1, j) <= 21.0);
            CHECK(ds.lid_labels[j] == 2);
        }
    }
    SUBCASE("string in doughnut")
    {
        const auto ds = string_in_doughnut(2000, 3);
        for (Eigen::Index j = 0; j < ds.size(); ++j) {
            const Eigen::Vector3d p = ds.points.col(j);
            const double ring = std::hypot(p[0], p[1]);
            if (ds.lid_labels[j] == 2)
                CHECK(std::pow(ring - 10.0, 2) + p[2] * p[2] == doctest::Approx(1.0).epsilon(1e-9));
            else {
                CHECK(ring == doctest::Approx(10.0));
                CHECK(p[2] == 0.0);
            }
        }
    }
    CHECK_THROWS_AS(toy_dataset("klein_bottle", 10, 1), ValidationError);
}

TEST_CASE("mae")
{
    CHECK(mae({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(mae({2, 4}, {1, 2}) == 1.5);
    CHECK_THROWS_AS((mae({1, 2}, {1})), ValidationError);
    CHECK_THROWS_AS((mae({}, {})), ValidationError);
}

TEST_CASE("concordance examples")
{
    CHECK(concordance({10, 20, 30}, {1, 2, 3}) == 1.0);
    CHECK(concordance({30, 20, 10}, {1, 2, 3}) == 0.0);
    CHECK(concordance({0.9, 1.1, 2.0}, {1, 1, 2}) == doctest::Approx(1.0));
    CHECK_THROWS_AS((concordance({1.0}, {1.0})), ValidationError);
}

TEST_CASE("concordance matches brute force, ties included")
{
    auto rng = make_rng(9);
    std::uniform_int_distribution<int> label(0, 4), est(0, 6);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial * 3;
        std::vector<double> e(n), l(n);
        for (int i = 0; i < n; ++i) {
            l[i] = label(rng);
            e[i] = trial % 2 ? est(rng) : l[i] + 0.1 * est(rng);
        }
        CHECK(concordance(e, l, ConcordanceVariant::Literal) == doctest::Approx(literal_concordance(e, l)).epsilon(1e-12));
        const bool any_pair = std::any_of(l.begin(), l.end(), [&](double v) { return v != l[0]; });
        if (any_pair)
            CHECK(concordance(e, l, ConcordanceVariant::ExcludeTies) ==
                  doctest::Approx(harrell_concordance(e, l)).epsilon(1e-12));
    }
}

TEST_CASE("spearman")
{
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    // Average ranks: a = (1, 2.5, 2.5, 4) against b = (1, 2, 3, 4).
    const double r = spearman({1, 2, 2, 3}, {1, 2, 3, 4});
    CHECK(r == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)).epsilon(1e-12));
    CHECK_THROWS_AS((spearman({1, 2}, {1, 2, 3})), ValidationError);
}
