#include "lid/modelfree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "lid/errors.hpp"

namespace lid {

NeighborIndex::NeighborIndex(Eigen::MatrixXd data, int k) : data_(std::move(data)), k_(k)
{
    if (k_ < 2) throw ValidationError("neighbour count k must be >= 2");
    if (k_ >= data_.cols()) throw ValidationError("neighbour count k must be smaller than the dataset size");
}

std::vector<NeighborIndex::Neighbor> NeighborIndex::nearest(const Eigen::VectorXd& query, Eigen::Index count) const
{
    if (query.size() != data_.rows()) throw ValidationError("query dimension does not match the index");
    count = std::min(count, data_.cols());
    const Eigen::VectorXd sq = (data_.colwise() - query).colwise().squaredNorm().transpose();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data_.cols()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto closer = [&](Eigen::Index a, Eigen::Index b) { return sq[a] < sq[b] || (sq[a] == sq[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + count, order.end(), closer);
    std::vector<Neighbor> out(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto j = order[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = {j, std::sqrt(sq[j])};
    }
    return out;
}

int lpca_estimate(const NeighborIndex& index, const Eigen::VectorXd& query, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("LPCA alpha must lie in (0, 1)");
    const auto nbrs = index.nearest(query, index.k());
    Eigen::MatrixXd local(index.dim(), static_cast<Eigen::Index>(nbrs.size()));
    for (std::size_t i = 0; i < nbrs.size(); ++i) local.col(static_cast<Eigen::Index>(i)) = index.data().col(nbrs[i].index);
    const Eigen::MatrixXd centered = local.colwise() - local.rowwise().mean();
    const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(local.cols() - 1);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov, Eigen::EigenvaluesOnly).eigenvalues();
    const double largest = ev.maxCoeff();
    if (!(largest > 0.0)) return 0;
    return static_cast<int>((ev.array() > alpha * largest).count());
}

double mle_from_distances(const std::vector<double>& t)
{
    const std::size_t k = t.size();
    if (k < 2) throw ValidationError("MLE needs at least two neighbour distances");
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
        if (!(t[j] > 0.0)) throw ValidationError("MLE needs positive neighbour distances");
        sum += std::log(t[k - 1] / t[j]);
    }
    const double mean = sum / static_cast<double>(k - 1);
    if (!(mean > 0.0)) throw NumericError("MLE undefined: all neighbour distances are equal");
    return 1.0 / mean;
}

MleResult mle_estimate(const NeighborIndex& index, const Eigen::VectorXd& query)
{
    const Eigen::Index k = index.k();
    Eigen::Index want = k;
    for (;;) {
        const auto nbrs = index.nearest(query, want);
        std::vector<double> dist;
        dist.reserve(static_cast<std::size_t>(k));
        int zeros = 0;
        for (const auto& n : nbrs) {
            if (n.distance == 0.0)
                ++zeros;
            else if (static_cast<Eigen::Index>(dist.size()) < k)
                dist.push_back(n.distance);
        }
        if (static_cast<Eigen::Index>(dist.size()) == k) return {mle_from_distances(dist), zeros};
        if (want >= index.data().cols()) throw ValidationError("fewer than k distinct neighbours for MLE");
        want = std::min<Eigen::Index>(index.data().cols(), want + zeros);
    }
}

double mle_global(const std::vector<double>& local)
{
    if (local.empty()) throw ValidationError("no local MLE estimates to aggregate");
    double inv = 0.0;
    for (double m : local) inv += 1.0 / m;
    return static_cast<double>(local.size()) / inv;
}

std::vector<LidRecord> lpca_batch(const NeighborIndex& index, const Eigen::MatrixXd& queries, double alpha,
                                  const Execution& exec)
{
    return map_points(queries.cols(), exec, [&](Eigen::Index i) {
        LidRecord r;
        r.index = i;
        r.lid = lpca_estimate(index, queries.col(i), alpha);
        r.extra = {{"k", static_cast<double>(index.k())}};
        return r;
    });
}

std::vector<LidRecord> mle_batch(const NeighborIndex& index, const Eigen::MatrixXd& queries, const Execution& exec)
{
    return map_points(queries.cols(), exec, [&](Eigen::Index i) {
        const auto res = mle_estimate(index, queries.col(i));
        LidRecord r;
        r.index = i;
        r.lid = res.lid;
        r.extra = {{"k", static_cast<double>(index.k())}, {"dropped_duplicates", static_cast<double>(res.dropped_duplicates)}};
        return r;
    });
}

}  // namespace lid
