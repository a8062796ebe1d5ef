#pragma once

#include <exception>
#include <mutex>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <omp.h>

namespace lid {

/// How a batch over query points is executed. `workers <= 0` lets OpenMP
/// pick; `serial` selects the single-threaded reference loop.
struct Execution {
    int workers = 0;
    bool serial = false;
};

/// Reference loop: f(0), f(1), ..., f(n-1) in order.
template <class F>
auto map_points_serial(Eigen::Index n, F&& f) -> std::vector<std::invoke_result_t<F&, Eigen::Index>>
{
    std::vector<std::invoke_result_t<F&, Eigen::Index>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(f(i));
    return out;
}

/// OpenMP loop with the same results as map_points_serial, provided f(i)
/// depends only on i. The first exception thrown by any iteration is
/// rethrown after the loop.
template <class F>
auto map_points_parallel(Eigen::Index n, int workers, F&& f) -> std::vector<std::invoke_result_t<F&, Eigen::Index>>
{
    using T = std::invoke_result_t<F&, Eigen::Index>;
    std::vector<T> out(static_cast<std::size_t>(n));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int threads = workers > 0 ? workers : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (Eigen::Index i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = f(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

template <class F>
auto map_points(Eigen::Index n, const Execution& exec, F&& f)
{
    return exec.serial ? map_points_serial(n, f) : map_points_parallel(n, exec.workers, f);
}

}  // namespace lid
