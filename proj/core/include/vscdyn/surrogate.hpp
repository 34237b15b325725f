#pragma once

#include <array>
#include <string>
#include <vector>

#include "vscdyn/analysis/transition_state.hpp"
#include "vscdyn/model.hpp"

namespace vscdyn {

/// Inputs of the six-bead F-Si(Me)-C-C-Ph surrogate. Lengths in bohr, force
/// constants in Hartree/bohr^2, couplings in Hartree/bohr^3, charges in e.
struct SurrogateParameters {
    std::array<std::string, 6> labels{"F", "Si", "Me", "C1", "C2", "Ph"};
    std::array<double, 6> masses_amu{19.0, 28.0, 45.0, 12.0, 12.0, 77.0};
    std::array<double, 6> charges{-0.8, 0.9, -0.2, -0.7, 0.1, -0.3};

    double r_sif = 3.12;
    double r_sime = 3.59;
    double r_sic = 3.6;
    double r_cc = 2.28;
    double r_cph = 5.35;

    double k_sif = 0.15; // starting point when tuning the target mode
    double k_sime = 0.2;
    double k_sic = 0.2; // curvature of the reactive well at its minimum
    double k_cc = 1.0;
    double k_cph = 0.3;

    double barrier_eV = 0.35;
    double barrier_frequency_cm = 86.0;
    double r_ts_offset = 1.2;   // r_ts - r0
    double r_outer_offset = 1.8; // r_outer - r0

    // Couplings that touch the reactive bond shift the relaxed saddle; the
    // others vanish to second order there.
    double g3_sif_sic = 4e-4;
    double g3_sic_cc = 4e-4;
    double g3_sif_sime = 0.01;
    double g3_cc_cph = 0.01;

    /// Bent angle of the Si-Me bond off the chain axis, degrees.
    double me_angle_deg = 90.0;

    /// Frequency the Si-F constant is tuned to, and the tolerance of the tuning.
    double target_mode_cm = 856.0;
    bool tune_target_mode = true;
    /// Adjust the bare reactive targets until the relaxed saddle reproduces
    /// barrier_eV and barrier_frequency_cm.
    bool tune_relaxed_barrier = true;
};

/// Particle indices in the surrogate.
namespace surrogate_index {
inline constexpr std::size_t F = 0;
inline constexpr std::size_t Si = 1;
inline constexpr std::size_t Me = 2;
inline constexpr std::size_t C1 = 3;
inline constexpr std::size_t C2 = 4;
inline constexpr std::size_t Ph = 5;
} // namespace surrogate_index

/// Bond indices in the surrogate.
namespace surrogate_bond {
inline constexpr std::size_t SiF = 0;
inline constexpr std::size_t SiMe = 1;
inline constexpr std::size_t SiC = 2;
inline constexpr std::size_t CC = 3;
inline constexpr std::size_t CPh = 4;
} // namespace surrogate_bond

struct SurrogateReport {
    SurrogateParameters parameters; // with tuned k_sif
    ReactiveTargets bare_targets;   // what the reactive bond was calibrated to
    double target_mode_cm = 0.0;    // closest mode to the requested frequency
    std::size_t target_mode = 0;    // index into the normal modes
    double target_mode_weight = 0.0; // |<mode|Si-C stretch>|
    TSResult transition_state;
};

/// Builds and tunes the surrogate. Throws CalibrationError if a tuning loop
/// does not converge.
ModelSystem build_surrogate(const SurrogateParameters& parameters, SurrogateReport* report = nullptr);

/// The default surrogate; built once and cached.
ModelSystem build_pta_surrogate();
SurrogateReport pta_surrogate_report();

} // namespace vscdyn
