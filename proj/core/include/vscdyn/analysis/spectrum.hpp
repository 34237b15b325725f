#pragma once

#include <span>
#include <vector>

#include "vscdyn/analysis/normal_modes.hpp"
#include "vscdyn/dynamics.hpp"

namespace vscdyn {

enum class Lineshape { lorentzian, gaussian };

struct SpectrumLine {
    std::size_t mode = 0;
    double frequency = 0.0;   // cm^-1
    double strength = 0.0;    // 2 w |e . d|^2, a.u.
    double si_c_weight = 0.0; // 0 unless weights were supplied
};

struct Spectrum {
    std::vector<SpectrumLine> lines;
    double broadening = 30.0; // FWHM, cm^-1
    Lineshape shape = Lineshape::lorentzian;

    /// Sum of unit-area line shapes scaled by strength, per cm^-1.
    double evaluate(double frequency_cm) const;
    std::vector<double> curve(std::span<const double> grid_cm) const;
};

/// Stick spectrum along `polarization`; near-zero and imaginary modes are
/// skipped. `weights` (optional, one per mode) fills si_c_weight.
Spectrum ir_spectrum(const NormalModes& modes, const Vec3& polarization, double broadening_cm = 30.0,
                     Lineshape shape = Lineshape::lorentzian, std::span<const double> weights = {});

enum class Window { none, hann };

struct TdSpectrum {
    std::vector<double> frequencies; // cm^-1, bin k = k / (N dt)
    std::vector<double> amplitude;   // |DFT| of the windowed signal
    double resolution = 0.0;         // cm^-1 per bin
};

/// DFT of the mean-removed, windowed projection e . mu(t). Needs >= 256 frames.
TdSpectrum td_spectrum(const Trajectory& trajectory, const Vec3& polarization, Window window = Window::hann);
TdSpectrum td_spectrum(std::span<const double> signal, double frame_spacing, Window window = Window::hann);

/// Local maxima above min_fraction of the global maximum, strongest first.
std::vector<double> spectrum_peaks(const TdSpectrum& spectrum, double min_fraction = 0.05,
                                   double min_frequency_cm = 0.0);

} // namespace vscdyn
