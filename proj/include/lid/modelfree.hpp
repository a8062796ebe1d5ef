#pragma once

#include <vector>

#include <Eigen/Core>

#include "lid/parallel.hpp"
#include "lid/record.hpp"

namespace lid {

/// Exact brute-force Euclidean k-nearest-neighbour search over the columns of
/// a D x n data matrix. Read-only after construction.
class NeighborIndex {
public:
    NeighborIndex(Eigen::MatrixXd data, int k);

    /// 100 neighbours, or 1000 when D > 100.
    static int default_k(Eigen::Index ambient) { return ambient > 100 ? 1000 : 100; }

    const Eigen::MatrixXd& data() const { return data_; }
    int k() const { return k_; }
    Eigen::Index dim() const { return data_.rows(); }

    struct Neighbor {
        Eigen::Index index;
        double distance;
    };
    /// The `count` nearest data points to `query`, closest first (ties by index).
    std::vector<Neighbor> nearest(const Eigen::VectorXd& query, Eigen::Index count) const;

private:
    Eigen::MatrixXd data_;
    int k_;
};

/// Local PCA: eigenvalues of the covariance of the k nearest neighbours, count
/// of those above alpha times the largest.
int lpca_estimate(const NeighborIndex& index, const Eigen::VectorXd& query, double alpha = 0.05);

struct MleResult {
    double lid;
    /// Zero-distance neighbours skipped before taking k.
    int dropped_duplicates;
};

/// Levina-Bickel estimate from the k smallest nonzero neighbour distances.
MleResult mle_estimate(const NeighborIndex& index, const Eigen::VectorXd& query);

/// Inverse of the mean inverse estimate.
double mle_global(const std::vector<double>& local_estimates);

/// MLE from sorted positive distances T_1 <= ... <= T_k.
double mle_from_distances(const std::vector<double>& sorted_distances);

std::vector<LidRecord> lpca_batch(const NeighborIndex& index, const Eigen::MatrixXd& queries, double alpha = 0.05,
                                  const Execution& exec = {});
std::vector<LidRecord> mle_batch(const NeighborIndex& index, const Eigen::MatrixXd& queries,
                                 const Execution& exec = {});

}  // namespace lid
