#include <doctest.h>

#include "lid/errors.hpp"
#include "lid/flipd.hpp"
#include "lid/lidl_ode.hpp"
#include "lid/modelfree.hpp"
#include "lid/nb.hpp"
#include "lid/parallel.hpp"
#include "lid/rng.hpp"
#include "test_support.hpp"

using namespace lid;

namespace {

void check_same(const std::vector<LidRecord>& a, const std::vector<LidRecord>& b)
{
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].index == b[i].index);
        CHECK(a[i].lid == b[i].lid);  // bitwise, not approximate
        CHECK(a[i].fallback == b[i].fallback);
        CHECK(a[i].extra == b[i].extra);
        if (!std::isnan(a[i].t0)) CHECK(a[i].t0 == b[i].t0);
    }
}

}  // namespace

TEST_CASE("every batch estimator gives the same records serially and in parallel")
{
    const auto vp = Schedule::vp();
    MlpScore net = test::random_mlp({5, {16, 8, 16}, 8, OutputParam::Noise}, vp, 3);
    auto rng = make_rng(4);
    const Eigen::MatrixXd pts = standard_normal(5, 13, rng);
    const Execution serial{1, true};

    for (int workers : {1, 3, 0}) {
        CAPTURE(workers);
        const Execution par{workers, false};
        const HutchinsonTrace hutch{7, ProbeNoise::Rademacher, 9};
        check_same(flipd_batch(vp, net, pts, 0.05, hutch, serial), flipd_batch(vp, net, pts, 0.05, hutch, par));
        check_same(flipd_auto_batch(vp, net, pts, ExactTrace{}, {}, serial),
                   flipd_auto_batch(vp, net, pts, ExactTrace{}, {}, par));
        const auto grid = DeltaGrid::standard();
        check_same(lidl_batch(vp, net, pts, grid, hutch, 8, serial), lidl_batch(vp, net, pts, grid, hutch, 8, par));
        NbConfig nb;
        nb.columns = 12;
        check_same(nb_batch(vp, net, pts, nb, serial), nb_batch(vp, net, pts, nb, par));
        NeighborIndex index(standard_normal(5, 300, rng), 20);
        check_same(lpca_batch(index, pts, 0.05, serial), lpca_batch(index, pts, 0.05, par));
        check_same(mle_batch(index, pts, serial), mle_batch(index, pts, par));
    }
}

TEST_CASE("parallel map keeps order and rethrows")
{
    const auto sq = [](Eigen::Index i) { return static_cast<double>(i * i); };
    CHECK(map_points_parallel(100, 3, sq) == map_points_serial(100, sq));
    CHECK(map_points_parallel(0, 3, sq).empty());
    const auto boom = [](Eigen::Index i) -> double {
        if (i == 17) throw NumericError("bad point");
        return 0.0;
    };
    CHECK_THROWS_AS(map_points_parallel(40, 3, boom), NumericError);
    CHECK_THROWS_AS(map_points_serial(40, boom), NumericError);
}
