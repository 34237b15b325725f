#pragma once

#include <cstddef>
#include <vector>

#include "vscdyn/cavity.hpp"
#include "vscdyn/model.hpp"

namespace vscdyn {

/// Central-difference Hessian of potential_energy, symmetrized.
Matrix hessian(const ModelSystem& system, const Vector& positions, double h = 1e-3);
/// Same finite differences without the final (H + H^T) / 2.
Matrix raw_hessian(const ModelSystem& system, const Vector& positions, double h = 1e-3);

/// Eigen-decomposition of a mass-weighted stiffness matrix.
///
/// For bare molecular modes `vectors` are orthonormal columns in mass-weighted
/// Cartesian coordinates and `coordinate_masses` holds the 3N masses. For
/// polaritonic modes the basis is (bare modes..., photon) and
/// `coordinate_masses` is empty.
struct NormalModes {
    Vector eigenvalues; // omega^2, a.u., ascending
    Vector frequencies; // cm^-1, negative for imaginary modes
    Matrix vectors;
    std::vector<Vec3> mode_dipole; // d mu / d Q_j
    std::vector<bool> near_zero;
    Vector coordinate_masses;
    Vector photon_weight; // polaritonic modes only

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
    /// Signed angular frequency in a.u.
    double omega(std::size_t j) const;
    /// Indices of modes not flagged near-zero.
    std::vector<std::size_t> vibrational() const;
};

inline constexpr double default_zero_mode_threshold_cm = 1.0;

/// Diagonalizes M^-1/2 H M^-1/2. `masses` is per particle (length N) in
/// electron masses; `dipole_gradient` is 3 x 3N (or empty for no dipoles).
NormalModes normal_modes(const Matrix& hessian, const Vector& masses, const Matrix& dipole_gradient = {},
                         double zero_threshold_cm = default_zero_mode_threshold_cm);

/// hessian + normal_modes for a system at a geometry.
NormalModes normal_modes(const ModelSystem& system, const Vector& positions, double h = 1e-3);

/// Coupled vibration-photon modes: stiffness
///   K_jk = w_j^2 d_jk + s_j s_k [self-polarization],  K_jc = w_c s_j [bilinear],
///   K_cc = w_c^2,   s_j = lambda (e . mode_dipole_j).
NormalModes polariton_modes(const NormalModes& modes, const CavityMode& mode);

/// Signed overlap <mode_j | s> with the normalized mass-weighted stretch of bond (i, j).
std::vector<double> bond_overlaps(const NormalModes& modes, const Vector& positions, std::size_t i, std::size_t j);
/// |<mode_j | s>| per mode; the squares sum to one over a complete basis.
std::vector<double> sic_weighted_spectrum(const NormalModes& modes, const Vector& positions, std::size_t i,
                                          std::size_t j);
/// Carries bare-mode overlaps into a polaritonic basis (photon overlap is zero).
std::vector<double> polariton_overlaps(const NormalModes& polaritons, const std::vector<double>& bare_overlaps);

/// sqrt(k / M) for a barrier of curvature -k.
double barrier_frequency(double curvature, double reduced_mass);

} // namespace vscdyn
