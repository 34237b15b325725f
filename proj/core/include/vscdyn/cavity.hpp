#pragma once

#include "vscdyn/model.hpp"

namespace vscdyn {

/// One cavity mode in the length gauge. The photon is a unit-mass classical
/// oscillator with
///   H = p^2/2 + w^2 q^2/2 + w q lambda (e.mu) + lambda^2 (e.mu)^2 / 2,
/// the last two terms switchable for bilinear-only or self-polarization-only
/// studies.
class CavityMode {
public:
    CavityMode(double omega_c, double lambda, Vec3 polarization, bool bilinear = true,
               bool self_polarization = true);

    double omega() const { return omega_; }
    double lambda() const { return lambda_; }
    const Vec3& polarization() const { return polarization_; }
    bool bilinear() const { return bilinear_; }
    bool self_polarization() const { return self_polarization_; }

    /// e . mu
    double project(const Vec3& mu) const { return polarization_.dot(mu); }

private:
    double omega_;
    double lambda_;
    Vec3 polarization_;
    bool bilinear_;
    bool self_polarization_;
};

struct PhotonState {
    double q = 0.0;
    double p = 0.0;
};

struct FullState {
    Vector positions;
    Vector velocities;
    PhotonState photon;
    double time = 0.0;
};

/// g0 / (hbar w_c) = lambda / sqrt(2 w_c) in atomic units.
double coupling_ratio(double lambda, double omega_c);
/// Inverse of coupling_ratio.
double lambda_for_ratio(double ratio, double omega_c);

/// Photon displacement that zeroes the cavity field: q = -lambda (e.mu) / w, p = 0.
PhotonState zero_field_init(const CavityMode& mode, const Vec3& mu);

/// Acceleration of q.
double photon_force(const CavityMode& mode, const PhotonState& photon, const Vec3& mu);

/// Cavity contribution to the nuclear forces (length 3N).
Vector nuclear_cavity_force(const CavityMode& mode, const PhotonState& photon, const ModelSystem& system,
                            const Vector& positions);
/// Same, for callers that already hold mu and d mu / dR.
Vector nuclear_cavity_force(const CavityMode& mode, const PhotonState& photon, const Vec3& mu,
                            const Matrix& dipole_gradient);

/// Photon energy plus interaction energy.
double cavity_energy(const CavityMode& mode, const PhotonState& photon, const Vec3& mu);

double kinetic_energy(const ModelSystem& system, const Vector& velocities);

/// Matter potential + nuclear kinetic + cavity energy. A null mode means no cavity.
double total_energy(const ModelSystem& system, const CavityMode* mode, const FullState& state);

/// Displacement in units of the quantum zero-point length: q / sqrt(1 / (2 w_c)).
double normalized_displacement(const CavityMode& mode, const PhotonState& photon);

} // namespace vscdyn
