// Serial reference loop against the OpenMP loop for each batch estimator.
// The range argument is the worker count; 0 selects the serial loop.

#include <benchmark/benchmark.h>

#include "lid/flipd.hpp"
#include "lid/mlp_score.hpp"
#include "lid/modelfree.hpp"
#include "lid/nb.hpp"
#include "lid/rng.hpp"

namespace {

using namespace lid;

constexpr Eigen::Index kDim = 10;
constexpr Eigen::Index kQueries = 128;

const MlpScore& network()
{
    static const MlpScore net = [] {
        MlpScore n({kDim, {128, 64, 128}, 32, OutputParam::Noise}, Schedule::vp());
        n.init_random(1);
        auto rng = make_rng(2);
        Eigen::VectorXd p = n.flat_parameters();
        p += 0.05 * standard_normal(p.size(), rng);
        n.set_flat_parameters(p);
        return n;
    }();
    return net;
}

const Eigen::MatrixXd& queries()
{
    static const Eigen::MatrixXd q = [] {
        auto rng = make_rng(3);
        return Eigen::MatrixXd(standard_normal(kDim, kQueries, rng));
    }();
    return q;
}

Execution execution(const benchmark::State& state)
{
    const int workers = static_cast<int>(state.range(0));
    return workers == 0 ? Execution{1, true} : Execution{workers, false};
}

void BM_FlipdExact(benchmark::State& state)
{
    const auto exec = execution(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(flipd_batch(Schedule::vp(), network(), queries(), 0.05, ExactTrace{}, exec));
    state.SetItemsProcessed(state.iterations() * kQueries);
}

void BM_FlipdHutchinson(benchmark::State& state)
{
    const auto exec = execution(state);
    const HutchinsonTrace mode{50, ProbeNoise::Rademacher, 4};
    for (auto _ : state) benchmark::DoNotOptimize(flipd_batch(Schedule::vp(), network(), queries(), 0.05, mode, exec));
    state.SetItemsProcessed(state.iterations() * kQueries);
}

void BM_FlipdAuto(benchmark::State& state)
{
    const auto exec = execution(state);
    const Eigen::MatrixXd q = queries().leftCols(16);
    for (auto _ : state) benchmark::DoNotOptimize(flipd_auto_batch(Schedule::vp(), network(), q, ExactTrace{}, {}, exec));
    state.SetItemsProcessed(state.iterations() * q.cols());
}

void BM_NormalBundle(benchmark::State& state)
{
    const auto exec = execution(state);
    for (auto _ : state) benchmark::DoNotOptimize(nb_batch(Schedule::vp(), network(), queries(), NbConfig{}, exec));
    state.SetItemsProcessed(state.iterations() * kQueries);
}

void BM_Lpca(benchmark::State& state)
{
    static const NeighborIndex index = [] {
        auto rng = make_rng(5);
        return NeighborIndex(standard_normal(kDim, 20000, rng), 100);
    }();
    const auto exec = execution(state);
    for (auto _ : state) benchmark::DoNotOptimize(lpca_batch(index, queries(), 0.05, exec));
    state.SetItemsProcessed(state.iterations() * kQueries);
}

}  // namespace

BENCHMARK(BM_FlipdExact)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FlipdHutchinson)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FlipdAuto)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_NormalBundle)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Lpca)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
