#pragma once

#include <span>
#include <utility>
#include <vector>

#include "vscdyn/cavity.hpp"
#include "vscdyn/dynamics.hpp"

namespace vscdyn {

using ParticlePair = std::pair<std::size_t, std::size_t>;

struct BondCorrelation {
    std::vector<double> times;       // window centres, a.u.
    std::vector<double> correlation; // |<fA fB>| / sqrt(<fA^2><fB^2>) per window
    std::vector<bool> degenerate;    // window had zero variance; value reported as 0
    double integrated = 0.0;         // mean over windows
};

/// Force along the instantaneous bond axis, (F_i - F_j) . (R_i - R_j) / |R_i - R_j|.
std::vector<double> bond_force_series(const Trajectory& trajectory, const ModelSystem& system,
                                      const CavityMode* mode, ParticlePair bond);

/// Sliding-window normalized inner product of two equally long series.
BondCorrelation sliding_correlation(std::span<const double> fa, std::span<const double> fb,
                                    std::span<const double> times, std::size_t window);

BondCorrelation bond_force_correlation(const Trajectory& trajectory, const ModelSystem& system,
                                       const CavityMode* mode, ParticlePair bond_a, ParticlePair bond_b,
                                       std::size_t window);

} // namespace vscdyn
