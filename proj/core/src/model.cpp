#include "vscdyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vscdyn/error.hpp"
#include "vscdyn/units.hpp"

namespace vscdyn {

namespace {

void require_positions(const ModelSystem& system, const Vector& positions) {
    if (static_cast<std::size_t>(positions.size()) != system.dof())
        throw ArgumentError("positions have length " + std::to_string(positions.size()) + ", expected " +
                            std::to_string(system.dof()));
    if (!positions.allFinite())
        throw ArgumentError("positions contain non-finite values");
}

// Quintic smoothstep and its derivative on t in [0, 1].
double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_d(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }

// Returns the number of slope sign changes of V on (r0, r_outer) and whether
// V'' stays negative on [r_ts, r_outer).
std::pair<int, bool> inspect_shape(const ReactivePotential& v) {
    constexpr int samples = 2000;
    const double span = v.r_outer() - v.r0();
    int changes = 0;
    double prev = v.derivative(v.r0() + span * 1e-4);
    bool concave_tail = true;
    for (int k = 1; k <= samples; ++k) {
        const double r = v.r0() + span * (1e-4 + (1.0 - 2e-4) * k / samples);
        const double d = v.derivative(r);
        if ((d > 0.0) != (prev > 0.0))
            ++changes;
        prev = d;
        if (r > v.r_ts() && r < v.r_outer() - span * 1e-3 && v.second_derivative(r) >= 0.0)
            concave_tail = false;
    }
    return {changes, concave_tail};
}

} // namespace

double Particle::mass() const { return units::amu_to_me(mass_amu); }

ReactivePotential::ReactivePotential(std::array<double, 5> coefficients, double r0, double r_ts, double r_outer)
    : c_(coefficients), r0_(r0), r_ts_(r_ts), r_outer_(r_outer) {
    for (double c : c_)
        if (!std::isfinite(c))
            throw ArgumentError("reactive bond coefficients must be finite");
    if (!(r0 > 0.0) || !(r_ts > r0) || !(r_outer > r_ts))
        throw ArgumentError("reactive bond requires 0 < r0 < r_ts < r_outer");
    if (!(barrier() > 0.0))
        throw ArgumentError("reactive bond barrier V(r_ts) - V(r0) must be positive");
}

double ReactivePotential::poly(double x) const {
    return x * x * (c_[0] + x * (c_[1] + x * (c_[2] + x * (c_[3] + x * c_[4]))));
}

double ReactivePotential::poly_d1(double x) const {
    return x * (2.0 * c_[0] + x * (3.0 * c_[1] + x * (4.0 * c_[2] + x * (5.0 * c_[3] + x * 6.0 * c_[4]))));
}

double ReactivePotential::poly_d2(double x) const {
    return 2.0 * c_[0] + x * (6.0 * c_[1] + x * (12.0 * c_[2] + x * (20.0 * c_[3] + x * 30.0 * c_[4])));
}

double ReactivePotential::value(double r) const {
    if (r <= r_outer_)
        return poly(r - r0_);
    const double xo = r_outer_ - r0_;
    return poly(xo) + poly_d1(xo) * (r - r_outer_);
}

double ReactivePotential::derivative(double r) const {
    return poly_d1(std::min(r, r_outer_) - r0_);
}

double ReactivePotential::second_derivative(double r) const {
    return r <= r_outer_ ? poly_d2(r - r0_) : 0.0;
}

double ReactivePotential::coupling_switch(double r) const {
    const double t = (r - r_outer_) / (r_outer_ - r0_);
    if (t <= 0.0)
        return 1.0;
    if (t >= 1.0)
        return 0.0;
    return 1.0 - smoothstep(t);
}

double ReactivePotential::coupling_switch_derivative(double r) const {
    const double w = r_outer_ - r0_;
    const double t = (r - r_outer_) / w;
    if (t <= 0.0 || t >= 1.0)
        return 0.0;
    return -smoothstep_d(t) / w;
}

ReactivePotential calibrate_reactive_bond(const ReactiveTargets& t) {
    if (!(t.barrier > 0.0))
        throw CalibrationError("barrier target must be positive", t.barrier);
    if (!(t.curvature_min > 0.0) || !(t.curvature_ts < 0.0))
        throw CalibrationError("need curvature_min > 0 and curvature_ts < 0", 0.0);
    const double d = t.r_ts - t.r0;
    if (!(t.r0 > 0.0) || !(d > 0.0))
        throw CalibrationError("infeasible targets: r_ts must exceed r0", d);
    const double r_outer = t.r_outer.value_or(t.r_ts + 0.5 * d);
    const double xo = r_outer - t.r0;
    if (!(xo > d))
        throw CalibrationError("infeasible targets: r_outer must exceed r_ts", xo - d);

    // V(r0) = V'(r0) = 0 hold by construction and V''(r0) fixes c2; the
    // remaining four conditions are linear in c3..c6.
    const double c2 = 0.5 * t.curvature_min;
    Eigen::Matrix4d a;
    Eigen::Vector4d b;
    a << 3 * d * d, 4 * std::pow(d, 3), 5 * std::pow(d, 4), 6 * std::pow(d, 5),
        std::pow(d, 3), std::pow(d, 4), std::pow(d, 5), std::pow(d, 6),
        6 * d, 12 * d * d, 20 * std::pow(d, 3), 30 * std::pow(d, 4),
        6 * xo, 12 * xo * xo, 20 * std::pow(xo, 3), 30 * std::pow(xo, 4);
    b << -2 * c2 * d, t.barrier - c2 * d * d, t.curvature_ts - 2 * c2, -2 * c2;

    const Eigen::FullPivLU<Eigen::Matrix4d> lu(a);
    if (lu.rank() < 4)
        throw CalibrationError("calibration system is singular", 0.0);
    Eigen::Vector4d c = lu.solve(b);
    // One step of iterative refinement; the system is poorly scaled for wide wells.
    c += lu.solve(b - a * c);

    const std::array<double, 5> coeffs{c2, c[0], c[1], c[2], c[3]};
    if (!std::all_of(coeffs.begin(), coeffs.end(), [](double v) { return std::isfinite(v); }))
        throw CalibrationError("calibration produced non-finite coefficients", INFINITY);

    const double scale = std::max({t.barrier, t.curvature_min, std::abs(t.curvature_ts)});
    ReactivePotential result(coeffs, t.r0, t.r_ts, r_outer);
    const double residuals[] = {
        result.value(t.r0),
        result.derivative(t.r0),
        result.second_derivative(t.r0) - t.curvature_min,
        result.derivative(t.r_ts),
        result.value(t.r_ts) - t.barrier,
        result.second_derivative(t.r_ts) - t.curvature_ts,
        result.second_derivative(r_outer),
    };
    double worst = 0.0;
    for (double r : residuals)
        worst = std::max(worst, std::abs(r));
    if (worst > 1e-10 * std::max(scale, 1.0))
        throw CalibrationError("calibration constraints not met", worst);

    const auto [changes, concave_tail] = inspect_shape(result);
    if (changes != 1 || !concave_tail)
        throw CalibrationError("calibrated well has more than one barrier or an early inflection",
                               static_cast<double>(changes));
    return result;
}

double ts_curvature(const ReactivePotential& potential, double reduced_mass) {
    if (!(reduced_mass > 0.0))
        throw ArgumentError("reduced mass must be positive");
    return units::hartree_to_cm(std::sqrt(std::abs(potential.second_derivative(potential.r_ts())) / reduced_mass));
}

double BondTerm::r0() const {
    if (const auto* h = std::get_if<HarmonicBond>(&form))
        return h->r0;
    return std::get<ReactivePotential>(form).r0();
}

double BondTerm::energy(double r) const {
    if (const auto* h = std::get_if<HarmonicBond>(&form)) {
        const double x = r - h->r0;
        return 0.5 * h->k * x * x;
    }
    return std::get<ReactivePotential>(form).value(r);
}

double BondTerm::derivative(double r) const {
    if (const auto* h = std::get_if<HarmonicBond>(&form))
        return h->k * (r - h->r0);
    return std::get<ReactivePotential>(form).derivative(r);
}

double BondTerm::coupling_switch(double r) const {
    if (const auto* v = std::get_if<ReactivePotential>(&form))
        return v->coupling_switch(r);
    return 1.0;
}

double BondTerm::coupling_switch_derivative(double r) const {
    if (const auto* v = std::get_if<ReactivePotential>(&form))
        return v->coupling_switch_derivative(r);
    return 0.0;
}

ModelSystem::ModelSystem(std::vector<Particle> particles, std::vector<BondTerm> bonds,
                         std::vector<CouplingTerm> couplings, DipoleModel dipole,
                         std::optional<std::size_t> reactive_bond,
                         Vector reference_positions)
    : particles_(std::move(particles)), bonds_(std::move(bonds)), couplings_(std::move(couplings)),
      dipole_(std::move(dipole)), reactive_bond_(reactive_bond), reference_(std::move(reference_positions)) {
    const std::size_t n = particles_.size();
    if (n == 0)
        throw ArgumentError("system needs at least one particle");
    std::set<std::string> labels;
    for (const auto& p : particles_) {
        if (!(p.mass_amu > 0.0) || !std::isfinite(p.mass_amu))
            throw ArgumentError("particle '" + p.label + "' must have positive mass");
        if (!std::isfinite(p.charge))
            throw ArgumentError("particle '" + p.label + "' has non-finite charge");
        if (!labels.insert(p.label).second)
            throw ArgumentError("duplicate particle label '" + p.label + "'");
    }
    std::size_t reactive_count = 0;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        const auto& bond = bonds_[b];
        if (bond.i >= n || bond.j >= n || bond.i == bond.j)
            throw ArgumentError("bond " + std::to_string(b) + " has invalid particle indices");
        if (const auto* h = std::get_if<HarmonicBond>(&bond.form)) {
            if (!(h->k > 0.0) || !(h->r0 >= 0.0) || !std::isfinite(h->k) || !std::isfinite(h->r0))
                throw ArgumentError("harmonic bond " + std::to_string(b) + " needs k > 0 and r0 >= 0");
        } else {
            ++reactive_count;
        }
    }
    if (reactive_bond_) {
        if (*reactive_bond_ >= bonds_.size() || !bonds_[*reactive_bond_].is_reactive() || reactive_count != 1)
            throw ArgumentError("system needs exactly one reactive double-well bond at reactive_bond_index");
    } else if (reactive_count != 0) {
        throw ArgumentError("reactive double-well bond present but no reactive_bond_index given");
    }
    for (std::size_t c = 0; c < couplings_.size(); ++c) {
        const auto& term = couplings_[c];
        if (term.bond_a >= bonds_.size() || term.bond_b >= bonds_.size() || term.bond_a == term.bond_b)
            throw ArgumentError("coupling " + std::to_string(c) + " has invalid bond indices");
        if (!std::isfinite(term.g3))
            throw ArgumentError("coupling " + std::to_string(c) + " has a non-finite coefficient");
    }
    if (dipole_.extra.size() != 0) {
        if (dipole_.extra.rows() != 3 || static_cast<std::size_t>(dipole_.extra.cols()) != 3 * n)
            throw ArgumentError("dipole correction must be a 3 x 3N matrix");
        if (!dipole_.extra.allFinite())
            throw ArgumentError("dipole correction contains non-finite values");
    }
    if (reference_.size() != 0) {
        if (static_cast<std::size_t>(reference_.size()) != 3 * n || !reference_.allFinite())
            throw ArgumentError("reference positions must be 3N finite values");
    }

    masses_.resize(static_cast<Eigen::Index>(n));
    coordinate_masses_.resize(static_cast<Eigen::Index>(3 * n));
    for (std::size_t i = 0; i < n; ++i) {
        const double m = particles_[i].mass();
        masses_[static_cast<Eigen::Index>(i)] = m;
        coordinate_masses_.segment<3>(static_cast<Eigen::Index>(3 * i)).setConstant(m);
    }
}

std::size_t ModelSystem::reactive_bond_index() const {
    if (!reactive_bond_)
        throw ArgumentError("system has no reactive bond");
    return *reactive_bond_;
}

const ReactivePotential& ModelSystem::reactive_potential() const {
    return std::get<ReactivePotential>(bonds_[reactive_bond_index()].form);
}

double ModelSystem::total_charge() const {
    double q = 0.0;
    for (const auto& p : particles_)
        q += p.charge;
    return q;
}

std::optional<std::size_t> ModelSystem::find_particle(const std::string& label) const {
    for (std::size_t i = 0; i < particles_.size(); ++i)
        if (particles_[i].label == label)
            return i;
    return std::nullopt;
}

double bond_length(const Vector& positions, std::size_t i, std::size_t j) {
    const auto ii = static_cast<Eigen::Index>(3 * i);
    const auto jj = static_cast<Eigen::Index>(3 * j);
    return (positions.segment<3>(jj) - positions.segment<3>(ii)).norm();
}

namespace {

struct BondGeometry {
    std::vector<double> r;
    std::vector<Vec3> unit; // points from i to j
};

BondGeometry bond_geometry(const ModelSystem& system, const Vector& x) {
    BondGeometry g;
    g.r.reserve(system.bonds().size());
    g.unit.reserve(system.bonds().size());
    for (const auto& b : system.bonds()) {
        const Vec3 d = x.segment<3>(static_cast<Eigen::Index>(3 * b.j)) - x.segment<3>(static_cast<Eigen::Index>(3 * b.i));
        const double r = d.norm();
        g.r.push_back(r);
        g.unit.push_back(r > 0.0 ? Vec3(d / r) : Vec3::Zero());
    }
    return g;
}

} // namespace

double potential_energy(const ModelSystem& system, const Vector& positions) {
    require_positions(system, positions);
    const auto g = bond_geometry(system, positions);
    const auto& bonds = system.bonds();
    double e = 0.0;
    for (std::size_t b = 0; b < bonds.size(); ++b)
        e += bonds[b].energy(g.r[b]);
    for (const auto& c : system.couplings()) {
        const auto& ba = bonds[c.bond_a];
        const auto& bb = bonds[c.bond_b];
        const double da = g.r[c.bond_a] - ba.r0();
        const double db = g.r[c.bond_b] - bb.r0();
        e += c.g3 * da * db * (da + db) * ba.coupling_switch(g.r[c.bond_a]) * bb.coupling_switch(g.r[c.bond_b]);
    }
    return e;
}

Vector forces(const ModelSystem& system, const Vector& positions) {
    require_positions(system, positions);
    const auto g = bond_geometry(system, positions);
    const auto& bonds = system.bonds();

    std::vector<double> de_dr(bonds.size(), 0.0);
    for (std::size_t b = 0; b < bonds.size(); ++b)
        de_dr[b] = bonds[b].derivative(g.r[b]);
    for (const auto& c : system.couplings()) {
        const auto& ba = bonds[c.bond_a];
        const auto& bb = bonds[c.bond_b];
        const double ra = g.r[c.bond_a];
        const double rb = g.r[c.bond_b];
        const double da = ra - ba.r0();
        const double db = rb - bb.r0();
        const double sa = ba.coupling_switch(ra);
        const double sb = bb.coupling_switch(rb);
        const double core = c.g3 * da * db * (da + db);
        de_dr[c.bond_a] += c.g3 * db * (2.0 * da + db) * sa * sb + core * ba.coupling_switch_derivative(ra) * sb;
        de_dr[c.bond_b] += c.g3 * da * (da + 2.0 * db) * sa * sb + core * sa * bb.coupling_switch_derivative(rb);
    }

    Vector f = Vector::Zero(positions.size());
    for (std::size_t b = 0; b < bonds.size(); ++b) {
        const Vec3 fj = -de_dr[b] * g.unit[b];
        f.segment<3>(static_cast<Eigen::Index>(3 * bonds[b].j)) += fj;
        f.segment<3>(static_cast<Eigen::Index>(3 * bonds[b].i)) -= fj;
    }
    return f;
}

Vec3 dipole(const ModelSystem& system, const Vector& positions) {
    require_positions(system, positions);
    Vec3 mu = Vec3::Zero();
    const auto& ps = system.particles();
    for (std::size_t i = 0; i < ps.size(); ++i)
        mu += ps[i].charge * positions.segment<3>(static_cast<Eigen::Index>(3 * i));
    if (system.dipole_model().extra.size() != 0)
        mu += system.dipole_model().extra * positions;
    return mu;
}

Matrix dipole_gradient(const ModelSystem& system) {
    Matrix d = Matrix::Zero(3, static_cast<Eigen::Index>(system.dof()));
    const auto& ps = system.particles();
    for (std::size_t i = 0; i < ps.size(); ++i)
        d.block<3, 3>(0, static_cast<Eigen::Index>(3 * i)).diagonal().setConstant(ps[i].charge);
    if (system.dipole_model().extra.size() != 0)
        d += system.dipole_model().extra;
    return d;
}

} // namespace vscdyn
