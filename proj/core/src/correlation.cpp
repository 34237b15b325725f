#include "vscdyn/analysis/correlation.hpp"

#include <cmath>

#include "vscdyn/error.hpp"

namespace vscdyn {

std::vector<double> bond_force_series(const Trajectory& trajectory, const ModelSystem& system,
                                      const CavityMode* mode, ParticlePair bond) {
    const auto [i, j] = bond;
    if (i >= system.size() || j >= system.size() || i == j)
        throw ArgumentError("invalid bond particle indices");
    const Matrix dmu = mode != nullptr ? dipole_gradient(system) : Matrix{};
    std::vector<double> out;
    out.reserve(trajectory.frames());
    const auto ii = static_cast<Eigen::Index>(3 * i);
    const auto jj = static_cast<Eigen::Index>(3 * j);
    for (std::size_t f = 0; f < trajectory.frames(); ++f) {
        const Vector& x = trajectory.positions[f];
        Vector force = forces(system, x);
        if (mode != nullptr) {
            const PhotonState photon{trajectory.photon_q[f], trajectory.photon_p[f]};
            force += nuclear_cavity_force(*mode, photon, dipole(system, x), dmu);
        }
        const Vec3 axis = x.segment<3>(ii) - x.segment<3>(jj);
        const double r = axis.norm();
        if (!(r > 0.0))
            throw ArgumentError("bond particles coincide");
        out.push_back((force.segment<3>(ii) - force.segment<3>(jj)).dot(axis / r));
    }
    return out;
}

BondCorrelation sliding_correlation(std::span<const double> fa, std::span<const double> fb,
                                    std::span<const double> times, std::size_t window) {
    if (window < 2)
        throw ArgumentError("correlation window must span at least two frames");
    if (fa.size() != fb.size() || fa.size() != times.size())
        throw ArgumentError("series lengths differ");
    if (fa.size() < window)
        throw ArgumentError("series shorter than the correlation window");

    // Prefix sums keep every window O(1).
    const std::size_t n = fa.size();
    std::vector<double> sab(n + 1, 0.0), saa(n + 1, 0.0), sbb(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        sab[k + 1] = sab[k] + fa[k] * fb[k];
        saa[k + 1] = saa[k] + fa[k] * fa[k];
        sbb[k + 1] = sbb[k] + fb[k] * fb[k];
    }

    BondCorrelation out;
    const std::size_t count = n - window + 1;
    out.times.reserve(count);
    out.correlation.reserve(count);
    out.degenerate.reserve(count);
    double sum = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
        const double ab = sab[s + window] - sab[s];
        const double aa = saa[s + window] - saa[s];
        const double bb = sbb[s + window] - sbb[s];
        const double denom = std::sqrt(aa * bb);
        double c = 0.0;
        bool degenerate = !(denom > 0.0);
        if (!degenerate)
            c = std::min(1.0, std::abs(ab) / denom);
        out.times.push_back(0.5 * (times[s] + times[s + window - 1]));
        out.correlation.push_back(c);
        out.degenerate.push_back(degenerate);
        sum += c;
    }
    out.integrated = sum / static_cast<double>(count);
    return out;
}

BondCorrelation bond_force_correlation(const Trajectory& trajectory, const ModelSystem& system,
                                       const CavityMode* mode, ParticlePair bond_a, ParticlePair bond_b,
                                       std::size_t window) {
    const auto fa = bond_force_series(trajectory, system, mode, bond_a);
    const auto fb = bond_force_series(trajectory, system, mode, bond_b);
    return sliding_correlation(fa, fb, trajectory.times, window);
}

} // namespace vscdyn
