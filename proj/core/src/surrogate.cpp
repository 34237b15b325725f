#include "vscdyn/surrogate.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "vscdyn/analysis/normal_modes.hpp"
#include "vscdyn/error.hpp"
#include "vscdyn/units.hpp"

namespace vscdyn {

namespace {

namespace si = surrogate_index;

Vector reference_geometry(const SurrogateParameters& p) {
    Vector x = Vector::Zero(18);
    const double theta = p.me_angle_deg * std::numbers::pi / 180.0;
    x.segment<3>(3 * si::F) = Vec3(-p.r_sif, 0.0, 0.0);
    x.segment<3>(3 * si::Me) = Vec3(p.r_sime * std::cos(theta), p.r_sime * std::sin(theta), 0.0);
    x.segment<3>(3 * si::C1) = Vec3(p.r_sic, 0.0, 0.0);
    x.segment<3>(3 * si::C2) = Vec3(p.r_sic + p.r_cc, 0.0, 0.0);
    x.segment<3>(3 * si::Ph) = Vec3(p.r_sic + p.r_cc + p.r_cph, 0.0, 0.0);
    Vec3 com = Vec3::Zero();
    double mtot = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        com += p.masses_amu[i] * x.segment<3>(static_cast<Eigen::Index>(3 * i));
        mtot += p.masses_amu[i];
    }
    com /= mtot;
    for (Eigen::Index i = 0; i < 6; ++i)
        x.segment<3>(3 * i) -= com;
    return x;
}

double sic_reduced_mass(const SurrogateParameters& p) {
    const double a = units::amu_to_me(p.masses_amu[si::Si]);
    const double b = units::amu_to_me(p.masses_amu[si::C1]);
    return a * b / (a + b);
}

ModelSystem assemble(const SurrogateParameters& p, const ReactiveTargets& targets) {
    std::vector<Particle> particles;
    for (std::size_t i = 0; i < 6; ++i)
        particles.push_back({p.labels[i], p.masses_amu[i], p.charges[i]});
    std::vector<BondTerm> bonds(5);
    bonds[surrogate_bond::SiF] = {si::Si, si::F, HarmonicBond{p.k_sif, p.r_sif}};
    bonds[surrogate_bond::SiMe] = {si::Si, si::Me, HarmonicBond{p.k_sime, p.r_sime}};
    bonds[surrogate_bond::SiC] = {si::Si, si::C1, calibrate_reactive_bond(targets)};
    bonds[surrogate_bond::CC] = {si::C1, si::C2, HarmonicBond{p.k_cc, p.r_cc}};
    bonds[surrogate_bond::CPh] = {si::C2, si::Ph, HarmonicBond{p.k_cph, p.r_cph}};
    std::vector<CouplingTerm> couplings;
    if (p.g3_sif_sic != 0.0)
        couplings.push_back({surrogate_bond::SiF, surrogate_bond::SiC, p.g3_sif_sic});
    if (p.g3_sic_cc != 0.0)
        couplings.push_back({surrogate_bond::SiC, surrogate_bond::CC, p.g3_sic_cc});
    if (p.g3_sif_sime != 0.0)
        couplings.push_back({surrogate_bond::SiF, surrogate_bond::SiMe, p.g3_sif_sime});
    if (p.g3_cc_cph != 0.0)
        couplings.push_back({surrogate_bond::CC, surrogate_bond::CPh, p.g3_cc_cph});
    return ModelSystem(std::move(particles), std::move(bonds), std::move(couplings), DipoleModel{},
                       surrogate_bond::SiC, reference_geometry(p));
}

struct TargetMode {
    std::size_t index = 0;
    double frequency = 0.0;
    double weight = 0.0;
};

TargetMode closest_mode(const ModelSystem& system, double target_cm) {
    const auto& x = system.reference_positions();
    const NormalModes nm = normal_modes(system, x);
    const auto weights = sic_weighted_spectrum(nm, x, si::Si, si::C1);
    TargetMode best;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t j : nm.vibrational()) {
        const double f = nm.frequencies[static_cast<Eigen::Index>(j)];
        if (std::abs(f - target_cm) < dist) {
            dist = std::abs(f - target_cm);
            best = {j, f, weights[j]};
        }
    }
    return best;
}

} // namespace

ModelSystem build_surrogate(const SurrogateParameters& parameters, SurrogateReport* report) {
    SurrogateParameters p = parameters;
    const double m_red = sic_reduced_mass(p);
    const double omega_b = units::wavenumber_to_hartree(p.barrier_frequency_cm);
    const double barrier = units::ev_to_hartree(p.barrier_eV);

    ReactiveTargets targets;
    targets.barrier = barrier;
    targets.r0 = p.r_sic;
    targets.r_ts = p.r_sic + p.r_ts_offset;
    targets.r_outer = p.r_sic + p.r_outer_offset;
    targets.curvature_min = p.k_sic;
    targets.curvature_ts = -m_red * omega_b * omega_b;

    // Secant on the Si-F constant. The couplings vanish to second order at
    // the minimum, so this is independent of the barrier tuning below.
    if (p.tune_target_mode) {
        auto residual = [&](double k) {
            SurrogateParameters q = p;
            q.k_sif = k;
            return closest_mode(assemble(q, targets), p.target_mode_cm).frequency - p.target_mode_cm;
        };
        double k0 = p.k_sif, k1 = p.k_sif * 1.05;
        double f0 = residual(k0), f1 = residual(k1);
        for (int it = 0; it < 60 && std::abs(f1) > 1e-7; ++it) {
            if (f1 == f0)
                break;
            const double k2 = std::max(1e-4, k1 - f1 * (k1 - k0) / (f1 - f0));
            k0 = k1;
            f0 = f1;
            k1 = k2;
            f1 = residual(k1);
        }
        if (!(std::abs(f1) < 1e-6))
            throw CalibrationError("could not tune the Si-F constant to the target mode", f1);
        p.k_sif = k1;
    }

    ModelSystem system = assemble(p, targets);
    TSResult ts;
    if (p.tune_relaxed_barrier) {
        double db = 0.0, dw = 0.0;
        for (int it = 0; it < 60; ++it) {
            ts = find_transition_state(system);
            db = barrier - units::ev_to_hartree(ts.barrier);
            dw = p.barrier_frequency_cm - ts.omega_b;
            if (std::abs(db) < 1e-12 && std::abs(dw) < 1e-7)
                break;
            targets.barrier += db;
            const double ratio = p.barrier_frequency_cm / ts.omega_b;
            targets.curvature_ts *= ratio * ratio;
            system = assemble(p, targets);
        }
        if (!(std::abs(db) < 1e-10 && std::abs(dw) < 1e-5))
            throw CalibrationError("relaxed barrier tuning did not converge", std::max(std::abs(db), std::abs(dw)));
    }

    if (report != nullptr) {
        if (!p.tune_relaxed_barrier)
            ts = find_transition_state(system);
        const TargetMode mode = closest_mode(system, p.target_mode_cm);
        report->parameters = p;
        report->bare_targets = targets;
        report->target_mode = mode.index;
        report->target_mode_cm = mode.frequency;
        report->target_mode_weight = mode.weight;
        report->transition_state = ts;
    }
    return system;
}

namespace {

struct Cached {
    SurrogateReport report;
    ModelSystem system;
};

const Cached& cached() {
    static const Cached c = [] {
        SurrogateReport r;
        ModelSystem s = build_surrogate(SurrogateParameters{}, &r);
        return Cached{std::move(r), std::move(s)};
    }();
    return c;
}

} // namespace

ModelSystem build_pta_surrogate() { return cached().system; }
SurrogateReport pta_surrogate_report() { return cached().report; }

} // namespace vscdyn
