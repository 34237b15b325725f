#include "vscdyn/analysis/occupation.hpp"

#include <cmath>

#include "vscdyn/error.hpp"

namespace vscdyn {

OccupationMap mode_occupation(const Trajectory& trajectory, const NormalModes& modes, const Vector& reference,
                              bool include_zero_modes) {
    const auto n = modes.coordinate_masses.size();
    if (n == 0 || reference.size() != n)
        throw ArgumentError("reference geometry does not match the mode basis");
    for (const auto& x : trajectory.positions)
        if (x.size() != n)
            throw ArgumentError("trajectory frames do not match the mode basis");

    OccupationMap map;
    map.times = trajectory.times;
    map.photon_q = trajectory.photon_q;
    for (std::size_t j = 0; j < modes.size(); ++j)
        if (include_zero_modes || !modes.near_zero[j]) {
            map.modes.push_back(j);
            map.frequencies.push_back(modes.frequencies[static_cast<Eigen::Index>(j)]);
        }

    const auto nm = static_cast<Eigen::Index>(map.modes.size());
    const auto frames = static_cast<Eigen::Index>(trajectory.frames());
    Matrix basis(n, nm);
    Vector w2(nm);
    for (Eigen::Index c = 0; c < nm; ++c) {
        const auto j = static_cast<Eigen::Index>(map.modes[static_cast<std::size_t>(c)]);
        basis.col(c) = modes.vectors.col(j);
        w2[c] = modes.eigenvalues[j];
    }
    const Vector sqrt_m = modes.coordinate_masses.cwiseSqrt();

    map.energies.resize(frames, nm);
    map.normalized.resize(frames, nm);
    for (Eigen::Index f = 0; f < frames; ++f) {
        const auto k = static_cast<std::size_t>(f);
        const Vector q = basis.transpose() * (sqrt_m.cwiseProduct(trajectory.positions[k] - reference));
        const Vector qd = basis.transpose() * sqrt_m.cwiseProduct(trajectory.velocities[k]);
        const Vector e = 0.5 * (qd.array().square() + w2.array() * q.array().square()).matrix();
        map.energies.row(f) = e.transpose();
        const double total = e.sum();
        if (total > 0.0)
            map.normalized.row(f) = e.transpose() / total;
        else
            map.normalized.row(f).setZero();
    }
    return map;
}

OccupationMap average_occupation(std::span<const OccupationMap> maps) {
    if (maps.empty())
        throw ArgumentError("no occupation maps to average");
    OccupationMap avg = maps.front();
    for (std::size_t m = 1; m < maps.size(); ++m) {
        const auto& x = maps[m];
        if (x.modes != avg.modes || x.energies.rows() != avg.energies.rows())
            throw ArgumentError("occupation maps have mismatched grids or bases");
        avg.energies += x.energies;
        avg.normalized += x.normalized;
        for (std::size_t f = 0; f < avg.photon_q.size(); ++f)
            avg.photon_q[f] += x.photon_q[f];
    }
    const double inv = 1.0 / static_cast<double>(maps.size());
    avg.energies *= inv;
    avg.normalized *= inv;
    for (double& q : avg.photon_q)
        q *= inv;
    return avg;
}

OccupationDifference occupation_difference(const OccupationMap& a, const OccupationMap& b) {
    if (a.modes != b.modes || a.times.size() != b.times.size())
        throw ArgumentError("occupation maps have mismatched grids or bases");
    for (std::size_t k = 0; k < a.times.size(); ++k)
        if (std::abs(a.times[k] - b.times[k]) > 1e-9 * std::max(1.0, std::abs(a.times[k])))
            throw ArgumentError("occupation maps have mismatched time grids");

    OccupationDifference d;
    d.times = a.times;
    d.modes = a.modes;
    d.frequencies = a.frequencies;
    d.difference = a.normalized - b.normalized;
    d.accumulated.assign(a.modes.size(), 0.0);
    for (std::size_t f = 1; f < d.times.size(); ++f) {
        const double dt = d.times[f] - d.times[f - 1];
        for (std::size_t c = 0; c < a.modes.size(); ++c) {
            const auto fi = static_cast<Eigen::Index>(f);
            const auto ci = static_cast<Eigen::Index>(c);
            d.accumulated[c] += 0.5 * dt * (d.difference(fi - 1, ci) + d.difference(fi, ci));
        }
    }
    d.photon_difference.resize(d.times.size());
    const bool have_photon = a.photon_q.size() == d.times.size() && b.photon_q.size() == d.times.size();
    for (std::size_t f = 0; f < d.times.size(); ++f)
        d.photon_difference[f] = have_photon ? a.photon_q[f] - b.photon_q[f] : 0.0;
    return d;
}

} // namespace vscdyn
