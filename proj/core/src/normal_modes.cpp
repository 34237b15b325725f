#include "vscdyn/analysis/normal_modes.hpp"

#include <cmath>

#include "vscdyn/error.hpp"
#include "vscdyn/units.hpp"

namespace vscdyn {

namespace {

double checked_energy(const ModelSystem& system, const Vector& x) {
    const double e = potential_energy(system, x);
    if (!std::isfinite(e))
        throw ArgumentError("non-finite energy during finite differencing");
    return e;
}

double signed_sqrt(double v) { return v < 0.0 ? -std::sqrt(-v) : std::sqrt(v); }

NormalModes from_stiffness(const Matrix& stiffness, double zero_threshold_cm) {
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(stiffness);
    if (solver.info() != Eigen::Success)
        throw Error("eigen-decomposition did not converge");
    NormalModes nm;
    nm.eigenvalues = solver.eigenvalues();
    nm.vectors = solver.eigenvectors();
    const auto n = nm.eigenvalues.size();
    nm.frequencies.resize(n);
    nm.near_zero.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        nm.frequencies[j] = units::hartree_to_cm(signed_sqrt(nm.eigenvalues[j]));
        nm.near_zero[static_cast<std::size_t>(j)] = std::abs(nm.frequencies[j]) < zero_threshold_cm;
    }
    return nm;
}

} // namespace

double NormalModes::omega(std::size_t j) const {
    return signed_sqrt(eigenvalues[static_cast<Eigen::Index>(j)]);
}

std::vector<std::size_t> NormalModes::vibrational() const {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < size(); ++j)
        if (!near_zero[j])
            idx.push_back(j);
    return idx;
}

Matrix raw_hessian(const ModelSystem& system, const Vector& positions, double h) {
    if (!(h > 0.0))
        throw ArgumentError("finite-difference step must be positive");
    const auto n = static_cast<Eigen::Index>(system.dof());
    if (positions.size() != n)
        throw ArgumentError("positions have the wrong length");
    Matrix hm(n, n);
    const double e0 = checked_energy(system, positions);
    Vector x = positions;
    for (Eigen::Index a = 0; a < n; ++a) {
        x[a] = positions[a] + h;
        const double ep = checked_energy(system, x);
        x[a] = positions[a] - h;
        const double em = checked_energy(system, x);
        x[a] = positions[a];
        hm(a, a) = (ep - 2.0 * e0 + em) / (h * h);
        for (Eigen::Index b = 0; b < n; ++b) {
            if (b == a)
                continue;
            double corner[4];
            int k = 0;
            for (double sa : {1.0, -1.0})
                for (double sb : {1.0, -1.0}) {
                    x[a] = positions[a] + sa * h;
                    x[b] = positions[b] + sb * h;
                    corner[k++] = checked_energy(system, x);
                }
            x[a] = positions[a];
            x[b] = positions[b];
            hm(a, b) = (corner[0] - corner[1] - corner[2] + corner[3]) / (4.0 * h * h);
        }
    }
    return hm;
}

Matrix hessian(const ModelSystem& system, const Vector& positions, double h) {
    const Matrix raw = raw_hessian(system, positions, h);
    return 0.5 * (raw + raw.transpose());
}

NormalModes normal_modes(const Matrix& hessian, const Vector& masses, const Matrix& dipole_gradient,
                         double zero_threshold_cm) {
    const auto n = hessian.rows();
    if (hessian.cols() != n || n != 3 * masses.size())
        throw ArgumentError("Hessian must be 3N x 3N for N masses");
    if ((masses.array() <= 0.0).any())
        throw ArgumentError("masses must be positive");
    const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
    if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw ArgumentError("Hessian is not symmetric");
    if (dipole_gradient.size() != 0 && (dipole_gradient.rows() != 3 || dipole_gradient.cols() != n))
        throw ArgumentError("dipole gradient must be 3 x 3N");

    Vector coord_mass(n);
    for (Eigen::Index i = 0; i < masses.size(); ++i)
        coord_mass.segment<3>(3 * i).setConstant(masses[i]);
    const Vector inv_sqrt = coord_mass.cwiseSqrt().cwiseInverse();
    Matrix k = inv_sqrt.asDiagonal() * hessian * inv_sqrt.asDiagonal();
    k = 0.5 * (k + k.transpose());

    NormalModes nm = from_stiffness(k, zero_threshold_cm);
    nm.coordinate_masses = coord_mass;
    nm.mode_dipole.assign(static_cast<std::size_t>(n), Vec3::Zero());
    if (dipole_gradient.size() != 0) {
        const Matrix d = dipole_gradient * inv_sqrt.asDiagonal() * nm.vectors;
        for (Eigen::Index j = 0; j < n; ++j)
            nm.mode_dipole[static_cast<std::size_t>(j)] = d.col(j);
    }
    return nm;
}

NormalModes normal_modes(const ModelSystem& system, const Vector& positions, double h) {
    return normal_modes(hessian(system, positions, h), system.masses(), dipole_gradient(system));
}

NormalModes polariton_modes(const NormalModes& modes, const CavityMode& mode) {
    const auto n = static_cast<Eigen::Index>(modes.size());
    Vector s(n);
    for (Eigen::Index j = 0; j < n; ++j)
        s[j] = mode.lambda() * mode.project(modes.mode_dipole[static_cast<std::size_t>(j)]);

    const double wc = mode.omega();
    Matrix k = Matrix::Zero(n + 1, n + 1);
    k.topLeftCorner(n, n).diagonal() = modes.eigenvalues;
    if (mode.self_polarization())
        k.topLeftCorner(n, n) += s * s.transpose();
    if (mode.bilinear()) {
        k.topRightCorner(n, 1) = wc * s;
        k.bottomLeftCorner(1, n) = wc * s.transpose();
    }
    k(n, n) = wc * wc;

    NormalModes nm = from_stiffness(k, default_zero_mode_threshold_cm);
    nm.mode_dipole.resize(static_cast<std::size_t>(n + 1));
    nm.photon_weight.resize(n + 1);
    for (Eigen::Index c = 0; c <= n; ++c) {
        Vec3 d = Vec3::Zero();
        for (Eigen::Index j = 0; j < n; ++j)
            d += nm.vectors(j, c) * modes.mode_dipole[static_cast<std::size_t>(j)];
        nm.mode_dipole[static_cast<std::size_t>(c)] = d;
        nm.photon_weight[c] = nm.vectors(n, c) * nm.vectors(n, c);
    }
    return nm;
}

std::vector<double> bond_overlaps(const NormalModes& modes, const Vector& positions, std::size_t i, std::size_t j) {
    const auto n = modes.coordinate_masses.size();
    if (n == 0 || positions.size() != n)
        throw ArgumentError("bond overlaps need Cartesian normal modes matching the geometry");
    if (i == j || 3 * i >= static_cast<std::size_t>(n) || 3 * j >= static_cast<std::size_t>(n))
        throw ArgumentError("invalid bond particle indices");
    const auto ii = static_cast<Eigen::Index>(3 * i);
    const auto jj = static_cast<Eigen::Index>(3 * j);
    const Vec3 axis = positions.segment<3>(jj) - positions.segment<3>(ii);
    if (!(axis.norm() > 0.0))
        throw ArgumentError("bond particles coincide");
    const Vec3 u = axis.normalized();
    Vector s = Vector::Zero(n);
    s.segment<3>(ii) = -u / std::sqrt(modes.coordinate_masses[ii]);
    s.segment<3>(jj) = u / std::sqrt(modes.coordinate_masses[jj]);
    s.normalize();
    const Vector proj = modes.vectors.transpose() * s;
    return {proj.data(), proj.data() + proj.size()};
}

std::vector<double> sic_weighted_spectrum(const NormalModes& modes, const Vector& positions, std::size_t i,
                                          std::size_t j) {
    auto w = bond_overlaps(modes, positions, i, j);
    for (double& v : w)
        v = std::abs(v);
    return w;
}

std::vector<double> polariton_overlaps(const NormalModes& polaritons, const std::vector<double>& bare_overlaps) {
    const auto n = static_cast<Eigen::Index>(bare_overlaps.size());
    if (polaritons.vectors.rows() != n + 1)
        throw ArgumentError("polaritonic basis does not match the bare overlaps");
    const Eigen::Map<const Vector> bare(bare_overlaps.data(), n);
    const Vector proj = polaritons.vectors.topRows(n).transpose() * bare;
    return {proj.data(), proj.data() + proj.size()};
}

double barrier_frequency(double curvature, double reduced_mass) {
    if (!(reduced_mass > 0.0))
        throw ArgumentError("reduced mass must be positive");
    return std::sqrt(std::abs(curvature) / reduced_mass);
}

} // namespace vscdyn
