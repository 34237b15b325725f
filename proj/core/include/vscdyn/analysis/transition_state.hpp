#pragma once

#include <cstddef>
#include <vector>

#include "vscdyn/model.hpp"

namespace vscdyn {

/// Central differences of the analytic forces, symmetrized.
Matrix force_hessian(const ModelSystem& system, const Vector& positions, double h = 1e-4);

struct MinimizeOptions {
    double gradient_tolerance = 1e-10; // Hartree / bohr
    std::size_t max_iterations = 200;
    double max_step = 0.25; // bohr, per Newton step
};

struct MinimizeResult {
    Vector positions;
    double energy = 0.0;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
};

/// Newton descent with an eigenvalue-filtered Hessian (negative curvatures
/// flipped, zero modes skipped). Throws SearchError without convergence.
MinimizeResult minimize(const ModelSystem& system, const Vector& start, const MinimizeOptions& options = {});

/// Minimizes with the distance between particles i and j held at `length`.
MinimizeResult constrained_minimize(const ModelSystem& system, const Vector& start, std::size_t i, std::size_t j,
                                    double length, const MinimizeOptions& options = {});

/// Moves i and j along their axis, keeping their centre of mass fixed, so that
/// their distance becomes `length`.
Vector set_bond_length(const ModelSystem& system, const Vector& positions, std::size_t i, std::size_t j,
                       double length);

struct TSScan {
    std::size_t i = 0;
    std::size_t j = 0;
    double r_min = 0.0; // bohr
    double r_max = 0.0; // bohr
    std::size_t n_points = 25;
};

/// Scan over the system's reactive bond from 0.9 r0 to 1.5 r_ts.
TSScan default_ts_scan(const ModelSystem& system);

struct TSResult {
    Vector geometry;          // bohr
    Vector reactant;          // relaxed minimum the barrier is measured from
    double energy = 0.0;      // Hartree, at the saddle
    double barrier = 0.0;     // eV
    double omega_b = 0.0;     // cm^-1, magnitude of the barrier frequency
    double bond_length = 0.0; // bohr, scanned bond at the saddle
    double curvature = 0.0;   // Hartree / bohr^2, relaxed d2E/dr2 at the saddle
    double gradient_norm = 0.0;
    std::size_t negative_modes = 0;
    std::vector<double> scan_lengths;  // bohr
    std::vector<double> scan_energies; // Hartree, relative to the reactant
};

/// Relaxed scan of the bond, quadratic interpolation around the profile
/// maximum, then Newton refinement on the full gradient. omega_b follows from
/// M w_b^2 = -d2E/dr2 with M the reduced mass of the bond pair and the
/// curvature taken along the relaxed bond coordinate.
TSResult find_transition_state(const ModelSystem& system, const Vector& start, const TSScan& scan);
TSResult find_transition_state(const ModelSystem& system);

} // namespace vscdyn
