#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "lid/mlp_score.hpp"
#include "lid/rng.hpp"

namespace lid::test {

/// MLP with every parameter (output layer included) drawn from N(0, scale^2),
/// so that scores and their derivatives are non-trivial.
inline MlpScore random_mlp(const MlpArchitecture& arch, const Schedule& sched, std::uint64_t seed,
                           double scale = 0.3)
{
    MlpScore net(arch, sched);
    auto rng = make_rng(seed, {0x7e57});
    net.set_flat_parameters(scale * standard_normal(net.parameter_count(), rng));
    return net;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("lid_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace lid::test
