#include "vscdyn/analysis/transition_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vscdyn/error.hpp"
#include "vscdyn/units.hpp"

namespace vscdyn {

namespace {

enum class Curvature { descend, saddle };

// Newton step from an eigen-decomposed Hessian. Directions with |lambda| below
// the tolerance carry no information (translations, rotations, constraints).
Vector filtered_step(const Matrix& h, const Vector& g, Curvature mode, double max_step) {
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    const Vector& lam = solver.eigenvalues();
    const Matrix& v = solver.eigenvectors();
    const double tol = 1e-8 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    Vector step = Vector::Zero(g.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        if (std::abs(lam[k]) < tol)
            continue;
        const double denom = mode == Curvature::descend ? std::abs(lam[k]) : lam[k];
        step -= (v.col(k).dot(g) / denom) * v.col(k);
    }
    const double norm = step.norm();
    if (norm > max_step)
        step *= max_step / norm;
    return step;
}

// Pseudo-inverse quadratic form c^T H^+ c over the informative subspace.
double compliance(const Matrix& h, const Vector& c) {
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    const Vector& lam = solver.eigenvalues();
    const Matrix& v = solver.eigenvectors();
    const double tol = 1e-8 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    double s = 0.0;
    for (Eigen::Index k = 0; k < lam.size(); ++k)
        if (std::abs(lam[k]) >= tol) {
            const double proj = v.col(k).dot(c);
            s += proj * proj / lam[k];
        }
    return s;
}

Vector distance_gradient(const Vector& x, std::size_t i, std::size_t j) {
    const auto ii = static_cast<Eigen::Index>(3 * i);
    const auto jj = static_cast<Eigen::Index>(3 * j);
    const Vec3 d = x.segment<3>(ii) - x.segment<3>(jj);
    const double r = d.norm();
    if (!(r > 0.0))
        throw ArgumentError("bond particles coincide");
    Vector c = Vector::Zero(x.size());
    c.segment<3>(ii) = d / r;
    c.segment<3>(jj) = -d / r;
    return c;
}

// Second derivative of |R_i - R_j| with respect to all coordinates.
Matrix distance_hessian(const Vector& x, std::size_t i, std::size_t j) {
    const auto ii = static_cast<Eigen::Index>(3 * i);
    const auto jj = static_cast<Eigen::Index>(3 * j);
    const Vec3 d = x.segment<3>(ii) - x.segment<3>(jj);
    const double r = d.norm();
    const Vec3 u = d / r;
    const Eigen::Matrix3d block = (Eigen::Matrix3d::Identity() - u * u.transpose()) / r;
    Matrix m = Matrix::Zero(x.size(), x.size());
    m.block<3, 3>(ii, ii) = block;
    m.block<3, 3>(jj, jj) = block;
    m.block<3, 3>(ii, jj) = -block;
    m.block<3, 3>(jj, ii) = -block;
    return m;
}

void check_pair(const ModelSystem& system, std::size_t i, std::size_t j) {
    if (i >= system.size() || j >= system.size() || i == j)
        throw ArgumentError("invalid bond particle indices");
}

} // namespace

Matrix force_hessian(const ModelSystem& system, const Vector& positions, double h) {
    if (!(h > 0.0))
        throw ArgumentError("finite-difference step must be positive");
    const auto n = static_cast<Eigen::Index>(system.dof());
    if (positions.size() != n)
        throw ArgumentError("positions have the wrong length");
    Matrix hm(n, n);
    Vector x = positions;
    for (Eigen::Index a = 0; a < n; ++a) {
        x[a] = positions[a] + h;
        const Vector fp = forces(system, x);
        x[a] = positions[a] - h;
        const Vector fm = forces(system, x);
        x[a] = positions[a];
        hm.col(a) = -(fp - fm) / (2.0 * h);
    }
    if (!hm.allFinite())
        throw ArgumentError("non-finite forces during finite differencing");
    return 0.5 * (hm + hm.transpose());
}

MinimizeResult minimize(const ModelSystem& system, const Vector& start, const MinimizeOptions& options) {
    MinimizeResult res;
    res.positions = start;
    res.energy = potential_energy(system, start);
    for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
        const Vector g = -forces(system, res.positions);
        res.gradient_norm = g.norm();
        if (res.gradient_norm < options.gradient_tolerance)
            return res;
        const Vector step =
            filtered_step(force_hessian(system, res.positions), g, Curvature::descend, options.max_step);
        // Backtrack while the energy rises; a few halvings suffice on these surfaces.
        double scale = 1.0;
        for (int k = 0; k < 30; ++k, scale *= 0.5) {
            const Vector trial = res.positions + scale * step;
            const double e = potential_energy(system, trial);
            if (e <= res.energy + 1e-14 * std::max(1.0, std::abs(res.energy))) {
                res.positions = trial;
                res.energy = e;
                break;
            }
        }
    }
    const Vector g = -forces(system, res.positions);
    res.gradient_norm = g.norm();
    if (res.gradient_norm < options.gradient_tolerance)
        return res;
    throw SearchError("minimization did not converge (gradient norm " + std::to_string(res.gradient_norm) + ")");
}

Vector set_bond_length(const ModelSystem& system, const Vector& positions, std::size_t i, std::size_t j,
                       double length) {
    check_pair(system, i, j);
    if (!(length > 0.0))
        throw ArgumentError("bond length must be positive");
    const auto ii = static_cast<Eigen::Index>(3 * i);
    const auto jj = static_cast<Eigen::Index>(3 * j);
    const Vec3 d = positions.segment<3>(ii) - positions.segment<3>(jj);
    const double r = d.norm();
    if (!(r > 0.0))
        throw ArgumentError("bond particles coincide");
    const Vec3 u = d / r;
    const double mi = system.masses()[static_cast<Eigen::Index>(i)];
    const double mj = system.masses()[static_cast<Eigen::Index>(j)];
    const double delta = length - r;
    Vector out = positions;
    out.segment<3>(ii) += delta * mj / (mi + mj) * u;
    out.segment<3>(jj) -= delta * mi / (mi + mj) * u;
    return out;
}

MinimizeResult constrained_minimize(const ModelSystem& system, const Vector& start, std::size_t i, std::size_t j,
                                    double length, const MinimizeOptions& options) {
    MinimizeResult res;
    res.positions = set_bond_length(system, start, i, j, length);
    for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
        const Vector g = -forces(system, res.positions);
        const Vector c = distance_gradient(res.positions, i, j);
        const Vector n = c / c.norm();
        const Vector pg = g - n.dot(g) * n;
        res.gradient_norm = pg.norm();
        if (res.gradient_norm < options.gradient_tolerance)
            break;
        // Hessian of the Lagrangian projected on the constraint surface.
        const double mu = c.dot(g) / c.squaredNorm();
        const Matrix hl = force_hessian(system, res.positions) - mu * distance_hessian(res.positions, i, j);
        const Matrix p = Matrix::Identity(g.size(), g.size()) - n * n.transpose();
        const Vector step = filtered_step(p * hl * p, pg, Curvature::descend, options.max_step);
        res.positions = set_bond_length(system, res.positions + step, i, j, length);
    }
    res.energy = potential_energy(system, res.positions);
    if (res.gradient_norm < options.gradient_tolerance)
        return res;
    throw SearchError("constrained minimization at r = " + std::to_string(length) +
                      " bohr did not converge (projected gradient " + std::to_string(res.gradient_norm) + ")");
}

TSScan default_ts_scan(const ModelSystem& system) {
    const auto& bond = system.reactive_bond();
    const auto& v = system.reactive_potential();
    const double span = v.r_ts() - v.r0();
    return TSScan{bond.i, bond.j, v.r0() + 0.1 * span, v.r_ts() + 0.5 * span, 25};
}

TSResult find_transition_state(const ModelSystem& system, const Vector& start, const TSScan& scan) {
    check_pair(system, scan.i, scan.j);
    if (scan.n_points < 3)
        throw ArgumentError("scan needs at least three points");
    if (!(scan.r_min > 0.0) || !(scan.r_max > scan.r_min))
        throw ArgumentError("scan range must satisfy 0 < r_min < r_max");
    if (start.size() != static_cast<Eigen::Index>(system.dof()))
        throw ArgumentError("start geometry has the wrong length");

    TSResult out;
    const MinimizeResult reactant = minimize(system, start);
    out.reactant = reactant.positions;

    std::vector<Vector> geoms;
    Vector x = reactant.positions;
    for (std::size_t k = 0; k < scan.n_points; ++k) {
        const double r = scan.r_min + (scan.r_max - scan.r_min) * static_cast<double>(k) /
                                          static_cast<double>(scan.n_points - 1);
        const MinimizeResult m = constrained_minimize(system, x, scan.i, scan.j, r);
        x = m.positions;
        geoms.push_back(x);
        out.scan_lengths.push_back(r);
        out.scan_energies.push_back(m.energy - reactant.energy);
    }

    std::size_t peak = 0;
    for (std::size_t k = 1; k + 1 < scan.n_points; ++k) {
        const auto& e = out.scan_energies;
        if (e[k] >= e[k - 1] && e[k] >= e[k + 1] && (peak == 0 || e[k] > e[peak]))
            peak = k;
    }
    if (peak == 0)
        throw SearchError("relaxed scan has no interior maximum");

    // Vertex of the parabola through the three points around the maximum.
    const double r0 = out.scan_lengths[peak - 1], r1 = out.scan_lengths[peak], r2 = out.scan_lengths[peak + 1];
    const double e0 = out.scan_energies[peak - 1], e1 = out.scan_energies[peak], e2 = out.scan_energies[peak + 1];
    const double denom = (r0 - r1) * (r0 - r2) * (r1 - r2);
    const double a = (r2 * (e1 - e0) + r1 * (e0 - e2) + r0 * (e2 - e1)) / denom;
    const double b = (r2 * r2 * (e0 - e1) + r1 * r1 * (e2 - e0) + r0 * r0 * (e1 - e2)) / denom;
    double r_star = a < 0.0 ? -b / (2.0 * a) : r1;
    r_star = std::clamp(r_star, r0, r2);

    Vector ts = constrained_minimize(system, geoms[peak], scan.i, scan.j, r_star).positions;
    double gnorm = 0.0;
    for (int it = 0; it < 100; ++it) {
        const Vector g = -forces(system, ts);
        gnorm = g.norm();
        if (gnorm < 1e-10)
            break;
        ts += filtered_step(force_hessian(system, ts), g, Curvature::saddle, 0.1);
    }
    gnorm = forces(system, ts).norm();
    if (!(gnorm < 1e-8))
        throw SearchError("saddle refinement did not converge (gradient norm " + std::to_string(gnorm) + ")");

    const Matrix h = force_hessian(system, ts);
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    const double tol = 1e-8 * std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
        if (solver.eigenvalues()[k] < -tol)
            ++out.negative_modes;

    out.geometry = ts;
    out.energy = potential_energy(system, ts);
    out.barrier = units::hartree_to_eV(out.energy - reactant.energy);
    out.bond_length = bond_length(ts, scan.i, scan.j);
    out.gradient_norm = gnorm;
    out.curvature = 1.0 / compliance(h, distance_gradient(ts, scan.i, scan.j));
    const double mi = system.masses()[static_cast<Eigen::Index>(scan.i)];
    const double mj = system.masses()[static_cast<Eigen::Index>(scan.j)];
    const double reduced = mi * mj / (mi + mj);
    out.omega_b = out.curvature < 0.0 ? units::hartree_to_cm(std::sqrt(-out.curvature / reduced)) : 0.0;
    return out;
}

TSResult find_transition_state(const ModelSystem& system) {
    if (system.reference_positions().size() == 0)
        throw ArgumentError("system has no reference geometry to start from");
    return find_transition_state(system, system.reference_positions(), default_ts_scan(system));
}

} // namespace vscdyn
