#pragma once

#include <span>
#include <vector>

#include "vscdyn/analysis/normal_modes.hpp"
#include "vscdyn/dynamics.hpp"

namespace vscdyn {

/// Harmonic energy per normal mode along a trajectory, with the basis frozen
/// at a reference geometry.
struct OccupationMap {
    std::vector<double> times;       // a.u.
    std::vector<std::size_t> modes;  // indices into the NormalModes basis
    std::vector<double> frequencies; // cm^-1, one per column
    Matrix energies;                 // frames x modes, Hartree
    Matrix normalized;               // energies / row sum
    std::vector<double> photon_q;    // raw classical displacement
};

/// Q_j = v_j^T M^1/2 (R - R_ref), E_j = (Qdot_j^2 + w_j^2 Q_j^2) / 2. Only
/// vibrational modes are projected unless include_zero_modes is set.
OccupationMap mode_occupation(const Trajectory& trajectory, const NormalModes& modes, const Vector& reference,
                              bool include_zero_modes = false);

/// Frame-wise mean of maps sharing one time grid and basis.
OccupationMap average_occupation(std::span<const OccupationMap> maps);

struct OccupationDifference {
    std::vector<double> times;
    std::vector<std::size_t> modes;
    std::vector<double> frequencies;
    Matrix difference;                    // frames x modes, normalized occupations
    std::vector<double> accumulated;      // trapezoidal time integral per mode
    std::vector<double> photon_difference; // per frame
};

OccupationDifference occupation_difference(const OccupationMap& a, const OccupationMap& b);

} // namespace vscdyn
