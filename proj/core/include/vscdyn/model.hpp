#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace vscdyn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

struct Particle {
    std::string label;
    double mass_amu = 0.0;
    double charge = 0.0; // elementary charges

    double mass() const; // electron masses
};

struct HarmonicBond {
    double k = 0.0;  // Hartree / bohr^2
    double r0 = 0.0; // bohr
};

/// Targets for the reactive double-well bond. All values in atomic units.
struct ReactiveTargets {
    double barrier = 0.0;       // V(r_ts) - V(r0)
    double r0 = 0.0;            // local minimum
    double r_ts = 0.0;          // barrier top
    double curvature_min = 0.0; // V''(r0) > 0
    double curvature_ts = 0.0;  // V''(r_ts) < 0
    /// Inflection point beyond the barrier where the linear outer branch takes
    /// over. Defaults to r_ts + (r_ts - r0) / 2.
    std::optional<double> r_outer;
};

/// Sextic polynomial in x = r - r0,
///   V(x) = c2 x^2 + c3 x^3 + c4 x^4 + c5 x^5 + c6 x^6,
/// continued linearly past the outer inflection point r_outer, where V'' = 0,
/// so the joined curve is C2 and outer forces stay bounded.
class ReactivePotential {
public:
    ReactivePotential(std::array<double, 5> coefficients, double r0, double r_ts, double r_outer);

    double value(double r) const;
    double derivative(double r) const;
    double second_derivative(double r) const;

    /// Smooth (C2) factor that fades anharmonic couplings out between r_outer
    /// and r_outer + (r_outer - r0), so a dissociating bond cannot drive its
    /// partners with unbounded forces.
    double coupling_switch(double r) const;
    double coupling_switch_derivative(double r) const;

    const std::array<double, 5>& coefficients() const { return c_; }
    double r0() const { return r0_; }
    double r_ts() const { return r_ts_; }
    double r_outer() const { return r_outer_; }
    double barrier() const { return value(r_ts_) - value(r0_); }

private:
    double poly(double x) const;
    double poly_d1(double x) const;
    double poly_d2(double x) const;

    std::array<double, 5> c_;
    double r0_;
    double r_ts_;
    double r_outer_;
};

/// Solves the six calibration constraints (value, slope, curvature at r0 and
/// at r_ts) plus V''(r_outer) = 0 for the sextic coefficients. Throws
/// CalibrationError when the targets are degenerate or the resulting curve has
/// more than one maximum on the inner branch.
ReactivePotential calibrate_reactive_bond(const ReactiveTargets& targets);

/// Barrier frequency sqrt(|V''(r_ts)| / reduced_mass) in cm^-1.
double ts_curvature(const ReactivePotential& potential, double reduced_mass);

struct BondTerm {
    std::size_t i = 0;
    std::size_t j = 0;
    std::variant<HarmonicBond, ReactivePotential> form;

    bool is_reactive() const { return std::holds_alternative<ReactivePotential>(form); }
    double r0() const;
    double energy(double r) const;
    double derivative(double r) const;
    /// 1 for harmonic bonds; the reactive potential's fade-out factor otherwise.
    double coupling_switch(double r) const;
    double coupling_switch_derivative(double r) const;
};

/// Cubic mode-mode coupling g3 * [dA dB^2 + dB dA^2] with d = r - r0.
struct CouplingTerm {
    std::size_t bond_a = 0;
    std::size_t bond_b = 0;
    double g3 = 0.0; // Hartree / bohr^3
};

/// Fixed partial charges plus an optional constant 3 x 3N correction.
struct DipoleModel {
    Matrix extra; // empty means zero
};

class ModelSystem {
public:
    ModelSystem(std::vector<Particle> particles, std::vector<BondTerm> bonds,
                std::vector<CouplingTerm> couplings, DipoleModel dipole, std::optional<std::size_t> reactive_bond,
                Vector reference_positions = {});

    std::size_t size() const { return particles_.size(); }
    std::size_t dof() const { return 3 * particles_.size(); }

    const std::vector<Particle>& particles() const { return particles_; }
    const std::vector<BondTerm>& bonds() const { return bonds_; }
    const std::vector<CouplingTerm>& couplings() const { return couplings_; }
    const DipoleModel& dipole_model() const { return dipole_; }
    /// Harmonic-only systems (used for verification) have no reactive bond;
    /// the accessors below throw ArgumentError for them.
    bool has_reactive_bond() const { return reactive_bond_.has_value(); }
    std::size_t reactive_bond_index() const;
    const BondTerm& reactive_bond() const { return bonds_[reactive_bond_index()]; }
    const ReactivePotential& reactive_potential() const;

    /// Geometry the system was built around (usually the reactant minimum).
    /// Empty for systems defined without one.
    const Vector& reference_positions() const { return reference_; }

    /// Per-particle masses in electron masses.
    const Vector& masses() const { return masses_; }
    /// Masses repeated per Cartesian coordinate (length 3N).
    const Vector& coordinate_masses() const { return coordinate_masses_; }
    double total_mass() const { return masses_.sum(); }
    double total_charge() const;

    std::optional<std::size_t> find_particle(const std::string& label) const;

private:
    std::vector<Particle> particles_;
    std::vector<BondTerm> bonds_;
    std::vector<CouplingTerm> couplings_;
    DipoleModel dipole_;
    std::optional<std::size_t> reactive_bond_;
    Vector reference_;
    Vector masses_;
    Vector coordinate_masses_;
};

double bond_length(const Vector& positions, std::size_t i, std::size_t j);

double potential_energy(const ModelSystem& system, const Vector& positions);
Vector forces(const ModelSystem& system, const Vector& positions);

Vec3 dipole(const ModelSystem& system, const Vector& positions);
/// d mu / d R, a constant 3 x 3N matrix.
Matrix dipole_gradient(const ModelSystem& system);

} // namespace vscdyn
