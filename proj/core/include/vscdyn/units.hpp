#pragma once

// Atomic units are used everywhere inside the library (Hartree, bohr, electron
// mass, hbar = 1). Conversions happen only at the file/config boundary.

namespace vscdyn::units {

inline constexpr double hartree_to_wavenumber = 219474.6313632; // cm^-1
inline constexpr double hartree_to_ev = 27.211386245988;
inline constexpr double amu_to_electron_mass = 1822.888486209;
inline constexpr double boltzmann = 3.166811563e-6; // Hartree / K
inline constexpr double fs_to_au_time = 41.341373335;
inline constexpr double bohr_to_angstrom = 0.529177210903;

constexpr double wavenumber_to_hartree(double cm) { return cm / hartree_to_wavenumber; }
constexpr double hartree_to_cm(double ha) { return ha * hartree_to_wavenumber; }
constexpr double ev_to_hartree(double ev) { return ev / hartree_to_ev; }
constexpr double hartree_to_eV(double ha) { return ha * hartree_to_ev; }
constexpr double fs_to_au(double fs) { return fs * fs_to_au_time; }
constexpr double au_to_fs(double t) { return t / fs_to_au_time; }
constexpr double amu_to_me(double amu) { return amu * amu_to_electron_mass; }
constexpr double bohr_to_ang(double b) { return b * bohr_to_angstrom; }
constexpr double ang_to_bohr(double a) { return a / bohr_to_angstrom; }

} // namespace vscdyn::units
