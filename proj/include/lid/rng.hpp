#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace lid {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream key from a base seed and a list of counters,
/// e.g. (seed, epoch) or (seed, point index).
inline std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> counters)
{
    std::uint64_t key = mix64(seed);
    for (auto c : counters) key = mix64(key ^ mix64(c + 0x632be59bd9b4e019ULL));
    return key;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> counters = {})
{
    return Rng(stream_key(seed, counters));
}

inline Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng)
{
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

inline Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng)
{
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

inline Eigen::MatrixXd rademacher(Eigen::Index rows, Eigen::Index cols, Rng& rng)
{
    std::bernoulli_distribution coin;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = coin(rng) ? 1.0 : -1.0;
    return m;
}

}  // namespace lid
