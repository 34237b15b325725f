#include "vscdyn/cavity.hpp"

#include <cmath>

#include "vscdyn/error.hpp"

namespace vscdyn {

CavityMode::CavityMode(double omega_c, double lambda, Vec3 polarization, bool bilinear, bool self_polarization)
    : omega_(omega_c), lambda_(lambda), polarization_(polarization), bilinear_(bilinear),
      self_polarization_(self_polarization) {
    if (!(omega_c > 0.0) || !std::isfinite(omega_c))
        throw ArgumentError("cavity frequency must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ArgumentError("coupling strength must be non-negative");
    if (!polarization.allFinite() || std::abs(polarization.norm() - 1.0) > 1e-12)
        throw ArgumentError("polarization must be a unit vector");
}

double coupling_ratio(double lambda, double omega_c) {
    if (!(omega_c > 0.0))
        throw ArgumentError("cavity frequency must be positive");
    if (!(lambda >= 0.0))
        throw ArgumentError("coupling strength must be non-negative");
    return lambda / std::sqrt(2.0 * omega_c);
}

double lambda_for_ratio(double ratio, double omega_c) {
    if (!(omega_c > 0.0))
        throw ArgumentError("cavity frequency must be positive");
    if (!(ratio >= 0.0))
        throw ArgumentError("coupling ratio must be non-negative");
    return ratio * std::sqrt(2.0 * omega_c);
}

PhotonState zero_field_init(const CavityMode& mode, const Vec3& mu) {
    return {-mode.lambda() * mode.project(mu) / mode.omega(), 0.0};
}

double photon_force(const CavityMode& mode, const PhotonState& photon, const Vec3& mu) {
    const double w = mode.omega();
    double a = -w * w * photon.q;
    if (mode.bilinear())
        a -= w * mode.lambda() * mode.project(mu);
    return a;
}

Vector nuclear_cavity_force(const CavityMode& mode, const PhotonState& photon, const Vec3& mu,
                            const Matrix& dipole_gradient) {
    double prefactor = 0.0;
    if (mode.bilinear())
        prefactor += mode.omega() * photon.q;
    if (mode.self_polarization())
        prefactor += mode.lambda() * mode.project(mu);
    // d(e.mu)/dR = D^T e
    return -(prefactor * mode.lambda()) * (dipole_gradient.transpose() * mode.polarization());
}

Vector nuclear_cavity_force(const CavityMode& mode, const PhotonState& photon, const ModelSystem& system,
                            const Vector& positions) {
    return nuclear_cavity_force(mode, photon, dipole(system, positions), dipole_gradient(system));
}

double cavity_energy(const CavityMode& mode, const PhotonState& photon, const Vec3& mu) {
    const double w = mode.omega();
    const double coupling = mode.lambda() * mode.project(mu);
    double e = 0.5 * photon.p * photon.p + 0.5 * w * w * photon.q * photon.q;
    if (mode.bilinear())
        e += w * photon.q * coupling;
    if (mode.self_polarization())
        e += 0.5 * coupling * coupling;
    return e;
}

double kinetic_energy(const ModelSystem& system, const Vector& velocities) {
    if (static_cast<std::size_t>(velocities.size()) != system.dof())
        throw ArgumentError("velocities have the wrong length");
    return 0.5 * (system.coordinate_masses().array() * velocities.array().square()).sum();
}

double total_energy(const ModelSystem& system, const CavityMode* mode, const FullState& state) {
    double e = potential_energy(system, state.positions) + kinetic_energy(system, state.velocities);
    if (mode != nullptr)
        e += cavity_energy(*mode, state.photon, dipole(system, state.positions));
    return e;
}

double normalized_displacement(const CavityMode& mode, const PhotonState& photon) {
    return photon.q * std::sqrt(2.0 * mode.omega());
}

} // namespace vscdyn
