#include "vscdyn/analysis/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "vscdyn/error.hpp"
#include "vscdyn/units.hpp"

namespace vscdyn {

namespace {

double lorentzian(double x, double fwhm) {
    const double g = 0.5 * fwhm;
    return g / (std::numbers::pi * (x * x + g * g));
}

double gaussian(double x, double fwhm) {
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

} // namespace

double Spectrum::evaluate(double frequency_cm) const {
    double s = 0.0;
    for (const auto& line : lines) {
        const double x = frequency_cm - line.frequency;
        s += line.strength * (shape == Lineshape::lorentzian ? lorentzian(x, broadening) : gaussian(x, broadening));
    }
    return s;
}

std::vector<double> Spectrum::curve(std::span<const double> grid_cm) const {
    std::vector<double> out;
    out.reserve(grid_cm.size());
    for (double f : grid_cm)
        out.push_back(evaluate(f));
    return out;
}

Spectrum ir_spectrum(const NormalModes& modes, const Vec3& polarization, double broadening_cm, Lineshape shape,
                     std::span<const double> weights) {
    if (std::abs(polarization.norm() - 1.0) > 1e-12)
        throw ArgumentError("polarization must be a unit vector");
    if (!(broadening_cm > 0.0))
        throw ArgumentError("broadening must be positive");
    if (!weights.empty() && weights.size() != modes.size())
        throw ArgumentError("one weight per mode expected");
    Spectrum sp;
    sp.broadening = broadening_cm;
    sp.shape = shape;
    for (std::size_t j = 0; j < modes.size(); ++j) {
        if (modes.near_zero[j] || modes.eigenvalues[static_cast<Eigen::Index>(j)] <= 0.0)
            continue;
        const double proj = polarization.dot(modes.mode_dipole[j]);
        SpectrumLine line;
        line.mode = j;
        line.frequency = modes.frequencies[static_cast<Eigen::Index>(j)];
        line.strength = 2.0 * modes.omega(j) * proj * proj;
        line.si_c_weight = weights.empty() ? 0.0 : weights[j];
        sp.lines.push_back(line);
    }
    return sp;
}

TdSpectrum td_spectrum(std::span<const double> signal, double frame_spacing, Window window) {
    const std::size_t n = signal.size();
    if (n < 256)
        throw ArgumentError("time-domain spectrum needs at least 256 frames");
    if (!(frame_spacing > 0.0))
        throw ArgumentError("frame spacing must be positive");

    double mean = 0.0;
    for (double v : signal)
        mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        double w = 1.0;
        if (window == Window::hann)
            w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
        x[k] = w * (signal[k] - mean);
    }

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, x);

    TdSpectrum out;
    const double d_omega = 2.0 * std::numbers::pi / (static_cast<double>(n) * frame_spacing);
    out.resolution = units::hartree_to_cm(d_omega);
    const std::size_t half = n / 2 + 1;
    out.frequencies.resize(half);
    out.amplitude.resize(half);
    for (std::size_t k = 0; k < half; ++k) {
        out.frequencies[k] = static_cast<double>(k) * out.resolution;
        out.amplitude[k] = std::abs(spec[k]);
    }
    return out;
}

TdSpectrum td_spectrum(const Trajectory& trajectory, const Vec3& polarization, Window window) {
    if (trajectory.frames() < 256)
        throw ArgumentError("time-domain spectrum needs at least 256 frames");
    std::vector<double> signal;
    signal.reserve(trajectory.frames());
    for (const auto& mu : trajectory.dipoles)
        signal.push_back(polarization.dot(mu));
    return td_spectrum(signal, trajectory.frame_spacing(), window);
}

std::vector<double> spectrum_peaks(const TdSpectrum& spectrum, double min_fraction, double min_frequency_cm) {
    const auto& a = spectrum.amplitude;
    if (a.size() < 3)
        return {};
    const double top = *std::max_element(a.begin(), a.end());
    std::vector<std::pair<double, double>> peaks;
    for (std::size_t k = 1; k + 1 < a.size(); ++k) {
        if (spectrum.frequencies[k] < min_frequency_cm)
            continue;
        if (a[k] > a[k - 1] && a[k] >= a[k + 1] && a[k] >= min_fraction * top)
            peaks.emplace_back(a[k], spectrum.frequencies[k]);
    }
    std::sort(peaks.begin(), peaks.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
    std::vector<double> out;
    out.reserve(peaks.size());
    for (const auto& p : peaks)
        out.push_back(p.second);
    return out;
}

} // namespace vscdyn
