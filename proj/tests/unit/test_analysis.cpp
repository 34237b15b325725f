#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "oracles.hpp"
#include "vscdyn/analysis/correlation.hpp"
#include "vscdyn/analysis/normal_modes.hpp"
#include "vscdyn/analysis/occupation.hpp"
#include "vscdyn/analysis/scan.hpp"
#include "vscdyn/analysis/spectrum.hpp"
#include "vscdyn/analysis/transition_state.hpp"
#include "vscdyn/dynamics.hpp"
#include "vscdyn/ensemble.hpp"
#include "vscdyn/error.hpp"
#include "vscdyn/surrogate.hpp"
#include "vscdyn/units.hpp"

using namespace vscdyn;
using namespace vscdyn::testing;

namespace {

std::vector<double> positive_frequencies(const NormalModes& m) {
    std::vector<double> out;
    for (std::size_t j = 0; j < m.size(); ++j)
        if (!m.near_zero[j] && m.eigenvalues[static_cast<Eigen::Index>(j)] > 0.0)
            out.push_back(m.omega(j));
    return out;
}

} // namespace

TEST_CASE("Hessian of a diatomic") {
    const double k = 0.1;
    const auto s = diatomic(k, 2.0, 2.0, 2.0);
    const Matrix h = hessian(s, s.reference_positions());
    Matrix expected = Matrix::Zero(6, 6);
    expected(0, 0) = expected(3, 3) = k;
    expected(0, 3) = expected(3, 0) = -k;
    // Transverse bends are quartic at rest length, which the h = 1e-3 stencil sees.
    CHECK((h - expected).lpNorm<Eigen::Infinity>() < 1e-7);
    CHECK((h - h.transpose()).norm() == 0.0);
    const Matrix raw = raw_hessian(s, s.reference_positions());
    CHECK((raw - raw.transpose()).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK_THROWS_AS(hessian(s, s.reference_positions(), 0.0), ArgumentError);
    CHECK_THROWS_AS(hessian(s, Vector::Zero(3)), ArgumentError);
}

TEST_CASE("diatomic frequency") {
    // Reduced mass 1000 m_e, so omega = sqrt(k / 1000).
    const auto s = diatomic(0.1, 2.0, 2000.0, 2.0);
    const auto m = normal_modes(s, s.reference_positions(), 1e-4);
    const auto w = positive_frequencies(m);
    REQUIRE(w.size() == 1);
    CHECK(w[0] == doctest::Approx(std::sqrt(1e-4)).epsilon(1e-8));
    CHECK(std::count(m.near_zero.begin(), m.near_zero.end(), true) == 5);
}

TEST_CASE("normal mode input checks") {
    CHECK_THROWS_AS(normal_modes(Matrix::Identity(6, 6), Vector::Ones(3)), ArgumentError);
    CHECK_THROWS_AS(normal_modes(Matrix::Identity(6, 6), Vector::Constant(2, -1.0)), ArgumentError);
    Matrix a = Matrix::Identity(6, 6);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(normal_modes(a, Vector::Ones(2)), ArgumentError);
    CHECK_THROWS_AS(normal_modes(Matrix::Identity(6, 6), Vector::Ones(2), Matrix::Zero(3, 5)), ArgumentError);
    CHECK_THROWS_AS(barrier_frequency(-1.0, 0.0), ArgumentError);
}

TEST_CASE("normal modes are orthonormal and reproduce the Hessian") {
    const auto s = harmonic_molecule(0.02);
    const Vector x = s.reference_positions();
    const Matrix h = hessian(s, x);
    const auto m = normal_modes(h, s.masses(), dipole_gradient(s));
    const auto n = m.vectors.cols();
    CHECK((m.vectors.transpose() * m.vectors - Matrix::Identity(n, n)).lpNorm<Eigen::Infinity>() < 1e-10);
    Matrix dyn = h;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            dyn(a, b) /= std::sqrt(m.coordinate_masses[a] * m.coordinate_masses[b]);
    const Matrix back = m.vectors * m.eigenvalues.asDiagonal() * m.vectors.transpose();
    CHECK((back - dyn).lpNorm<Eigen::Infinity>() < 1e-12);
    // Three stretches and no angular terms leave nine flat modes.
    CHECK(std::count(m.near_zero.begin(), m.near_zero.end(), true) == 9);
}

TEST_CASE("surrogate zero modes") {
    // Collinear chain plus an off-axis bead and no angular terms: only the
    // stretches carry stiffness, so 18 - 5 = 13 modes are flat.
    const auto s = build_pta_surrogate();
    const auto m = normal_modes(s, s.reference_positions());
    CHECK(std::count(m.near_zero.begin(), m.near_zero.end(), true) == 13);
    CHECK(positive_frequencies(m).size() == 5);
}

TEST_CASE("stick spectrum of a charged diatomic") {
    const double k = 0.1, mass = 2000.0, q = 0.5;
    const auto s = diatomic(k, 2.0, mass, 2.0, q);
    const auto m = normal_modes(s, s.reference_positions(), 1e-4);
    const auto sp = ir_spectrum(m, Vec3::UnitX());
    REQUIRE(sp.lines.size() == 1);
    const double w = std::sqrt(2.0 * k / mass);
    const double d = q * std::sqrt(2.0 / mass);
    CHECK(units::wavenumber_to_hartree(sp.lines[0].frequency) == doctest::Approx(w).epsilon(1e-8));
    CHECK(sp.lines[0].strength == doctest::Approx(2.0 * w * d * d).epsilon(1e-7));
    CHECK(ir_spectrum(m, Vec3::UnitY()).lines[0].strength < 1e-20);
    CHECK_THROWS_AS(ir_spectrum(m, Vec3(1.0, 1.0, 0.0)), ArgumentError);
    CHECK_THROWS_AS(ir_spectrum(m, Vec3::UnitX(), 0.0), ArgumentError);
    const std::vector<double> bad_weights(2, 0.0);
    CHECK_THROWS_AS(ir_spectrum(m, Vec3::UnitX(), 30.0, Lineshape::lorentzian, bad_weights), ArgumentError);
}

TEST_CASE("broadened spectra conserve the stick intensity") {
    const auto s = build_pta_surrogate();
    const auto m = normal_modes(s, s.reference_positions());
    for (auto shape : {Lineshape::lorentzian, Lineshape::gaussian}) {
        const auto sp = ir_spectrum(m, Vec3::UnitX(), 30.0, shape);
        double sticks = 0.0;
        for (const auto& l : sp.lines)
            sticks += l.strength;
        // Lorentzian tails need a wide grid: the weight beyond L is ~ FWHM / (pi L).
        const double step = 0.5, lo = -200000.0, hi = 200000.0;
        double area = 0.0;
        for (double f = lo; f <= hi; f += step)
            area += sp.evaluate(f) * step;
        CHECK(area == doctest::Approx(sticks).epsilon(1e-3));
    }
}

TEST_CASE("Gaussian width is the FWHM") {
    Spectrum sp;
    sp.lines.push_back({0, 1000.0, 1.0, 0.0});
    sp.broadening = 30.0;
    sp.shape = Lineshape::gaussian;
    CHECK(sp.evaluate(1015.0) == doctest::Approx(0.5 * sp.evaluate(1000.0)).epsilon(1e-12));
    sp.shape = Lineshape::lorentzian;
    CHECK(sp.evaluate(985.0) == doctest::Approx(0.5 * sp.evaluate(1000.0)).epsilon(1e-12));
    CHECK(sp.evaluate(1000.0) == doctest::Approx(1.0 / (std::numbers::pi * 15.0)));
}

TEST_CASE("polariton frequencies match the two-level closed form") {
    const double k = 0.05, mass = 2000.0, q = 0.5;
    const auto s = diatomic(k, 2.0, mass, 2.0, q);
    const auto bare = normal_modes(s, s.reference_positions());
    const double wv = std::sqrt(2.0 * k / mass);
    for (double detune : {0.8, 1.0, 1.3}) {
        for (double lambda : {0.01, 0.05, 0.1}) {
            const double wc = detune * wv;
            const CavityMode mode(wc, lambda, Vec3::UnitX());
            const auto pol = polariton_modes(bare, mode);
            auto w = positive_frequencies(pol);
            std::sort(w.begin(), w.end());
            REQUIRE(w.size() == 2);
            const double d = lambda * q * std::sqrt(2.0 / mass);
            const auto [lo, hi] = polariton_pair(wv, wc, d);
            CHECK(w[0] == doctest::Approx(lo).epsilon(1e-8));
            CHECK(w[1] == doctest::Approx(hi).epsilon(1e-8));
            double photon = 0.0;
            for (std::size_t j = 0; j < pol.size(); ++j)
                photon += pol.photon_weight[static_cast<Eigen::Index>(j)];
            CHECK(photon == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("self-polarization alone blue-shifts the vibration") {
    const double k = 0.05, mass = 2000.0, q = 0.5, lambda = 0.05;
    const auto s = diatomic(k, 2.0, mass, 2.0, q);
    const auto bare = normal_modes(s, s.reference_positions());
    const double wv = std::sqrt(2.0 * k / mass);
    const CavityMode mode(3.0 * wv, lambda, Vec3::UnitX(), false, true);
    auto w = positive_frequencies(polariton_modes(bare, mode));
    std::sort(w.begin(), w.end());
    const double d = lambda * q * std::sqrt(2.0 / mass);
    CHECK(w[0] == doctest::Approx(std::sqrt(wv * wv + d * d)).epsilon(1e-10));
    CHECK(w[0] > wv);
    CHECK(w[1] == doctest::Approx(3.0 * wv).epsilon(1e-10));
}

TEST_CASE("bond overlaps") {
    const auto s = build_pta_surrogate();
    const Vector x = s.reference_positions();
    const auto m = normal_modes(s, x);
    const auto w = sic_weighted_spectrum(m, x, surrogate_index::Si, surrogate_index::C1);
    double total = 0.0;
    for (double v : w) {
        CHECK(v >= 0.0);
        total += v * v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    const auto signed_w = bond_overlaps(m, x, surrogate_index::Si, surrogate_index::C1);
    for (std::size_t j = 0; j < w.size(); ++j)
        CHECK(std::abs(signed_w[j]) == w[j]);
    CHECK_THROWS_AS(bond_overlaps(m, x, 1, 1), ArgumentError);
    CHECK_THROWS_AS(bond_overlaps(m, x, 1, 17), ArgumentError);

    // The polariton basis redistributes weight without creating any.
    const CavityMode mode(units::wavenumber_to_hartree(856.0), 0.1, Vec3::UnitX());
    const auto pol = polariton_modes(m, mode);
    const auto pw = polariton_overlaps(pol, signed_w);
    double ptotal = 0.0;
    for (double v : pw)
        ptotal += v * v;
    CHECK(ptotal == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(polariton_overlaps(pol, std::vector<double>(3, 0.0)), ArgumentError);
}

TEST_CASE("time-domain spectrum") {
    const std::size_t n = 1024;
    const double dt = 40.0;
    SUBCASE("bin-aligned cosine") {
        const std::size_t bin = 50;
        std::vector<double> sig(n);
        for (std::size_t k = 0; k < n; ++k)
            sig[k] = 3.0 + 2.0 * std::cos(2.0 * std::numbers::pi * double(bin * k) / double(n));
        const auto sp = td_spectrum(sig, dt, Window::none);
        CHECK(sp.frequencies.size() == n / 2 + 1);
        CHECK(sp.resolution == doctest::Approx(units::hartree_to_cm(2 * std::numbers::pi / (n * dt))));
        CHECK(sp.amplitude[bin] == doctest::Approx(double(n)).epsilon(1e-10));
        CHECK(sp.amplitude[0] < 1e-9);
        const auto peaks = spectrum_peaks(sp);
        REQUIRE(!peaks.empty());
        CHECK(peaks[0] == doctest::Approx(sp.frequencies[bin]));
    }
    SUBCASE("constant signal") {
        const std::vector<double> sig(n, 4.2);
        const auto sp = td_spectrum(sig, dt);
        for (double a : sp.amplitude)
            CHECK(a < 1e-10);
    }
    SUBCASE("off-grid tone peaks in the nearest bin") {
        const double f = 50.3;
        std::vector<double> sig(n);
        for (std::size_t k = 0; k < n; ++k)
            sig[k] = std::sin(2.0 * std::numbers::pi * f * double(k) / double(n));
        const auto sp = td_spectrum(sig, dt, Window::hann);
        CHECK(spectrum_peaks(sp)[0] == doctest::Approx(sp.frequencies[50]));
    }
    SUBCASE("too short or bad spacing") {
        CHECK_THROWS_AS(td_spectrum(std::vector<double>(255, 0.0), dt), ArgumentError);
        CHECK_THROWS_AS(td_spectrum(std::vector<double>(300, 0.0), 0.0), ArgumentError);
    }
}

TEST_CASE("mode energies sum to the total energy of a quadratic system") {
    const auto s = linear_chain();
    const Vector x0 = s.reference_positions();
    const auto modes = normal_modes(s, x0);
    FullState st;
    st.positions = x0;
    st.positions[0] -= 0.05;
    st.positions[6] += 0.03;
    st.velocities = Vector::Zero(9);
    st.velocities[0] = 2e-4;
    st.velocities[3] = -1e-4;
    remove_com_momentum(s, st.velocities);
    const auto r = propagate(s, nullptr, st, {10.0, 400, 4});
    const auto map = mode_occupation(r.trajectory, modes, x0);
    CHECK(map.modes.size() == 2);
    for (std::size_t f = 0; f < r.trajectory.frames(); ++f) {
        const auto fi = static_cast<Eigen::Index>(f);
        const double e = r.trajectory.energies[f].potential + r.trajectory.energies[f].kinetic;
        CHECK(map.energies.row(fi).sum() == doctest::Approx(e).epsilon(1e-7));
        CHECK(map.normalized.row(fi).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Nothing moves, nothing is occupied.
    Trajectory still = r.trajectory;
    for (auto& p : still.positions)
        p = x0;
    for (auto& v : still.velocities)
        v.setZero();
    const auto none = mode_occupation(still, modes, x0);
    CHECK(none.energies.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(none.normalized.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(mode_occupation(still, modes, x0, true).modes.size() == 9);
    CHECK_THROWS_AS(mode_occupation(still, modes, Vector::Zero(3)), ArgumentError);
}

TEST_CASE("occupation averages and differences") {
    OccupationMap a, b;
    a.times = b.times = {0.0, 1.0, 2.0};
    a.modes = b.modes = {3, 4};
    a.frequencies = b.frequencies = {500.0, 900.0};
    a.energies = b.energies = Matrix::Ones(3, 2);
    a.normalized = Matrix::Constant(3, 2, 0.5);
    b.normalized.resize(3, 2);
    b.normalized << 0.25, 0.75, 0.25, 0.75, 0.25, 0.75;
    a.photon_q = {1.0, 2.0, 3.0};
    b.photon_q = {0.0, 0.0, 0.0};

    const auto d = occupation_difference(a, b);
    CHECK(d.difference(1, 0) == doctest::Approx(0.25));
    CHECK(d.accumulated[0] == doctest::Approx(0.5));
    CHECK(d.accumulated[1] == doctest::Approx(-0.5));
    CHECK(d.photon_difference[2] == 3.0);
    CHECK(occupation_difference(a, a).difference.norm() == 0.0);

    const std::vector<OccupationMap> both{a, b};
    const auto avg = average_occupation(both);
    CHECK(avg.normalized(0, 0) == doctest::Approx(0.375));
    CHECK(avg.photon_q[1] == 1.0);

    OccupationMap c = b;
    c.modes = {3, 5};
    CHECK_THROWS_AS(occupation_difference(a, c), ArgumentError);
    CHECK_THROWS_AS(average_occupation(std::span<const OccupationMap>{}), ArgumentError);
    c = b;
    c.times = {0.0, 1.0, 2.5};
    CHECK_THROWS_AS(occupation_difference(a, c), ArgumentError);
}

TEST_CASE("sliding correlation") {
    const std::size_t n = 200;
    std::vector<double> t(n), a(n), b(n), c(n), z(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        t[k] = double(k);
        a[k] = std::sin(0.3 * double(k)) + 0.1;
        b[k] = -2.0 * a[k];
        c[k] = std::cos(2.0 * std::numbers::pi * double(k) / 20.0);
    }
    const auto same = sliding_correlation(a, a, t, 16);
    CHECK(same.correlation.size() == n - 16 + 1);
    CHECK(same.times[0] == doctest::Approx(7.5));
    for (double v : same.correlation)
        CHECK(v == doctest::Approx(1.0));
    CHECK(sliding_correlation(a, b, t, 16).integrated == doctest::Approx(1.0));

    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k)
        s[k] = std::sin(2.0 * std::numbers::pi * double(k) / 20.0);
    const auto ortho = sliding_correlation(s, c, t, 20);
    for (double v : ortho.correlation)
        CHECK(v < 1e-12);

    const auto flat = sliding_correlation(a, z, t, 16);
    CHECK(flat.integrated == 0.0);
    CHECK(std::all_of(flat.degenerate.begin(), flat.degenerate.end(), [](bool v) { return v; }));

    CHECK_THROWS_AS(sliding_correlation(a, b, t, 1), ArgumentError);
    CHECK_THROWS_AS(sliding_correlation(a, std::span<const double>(b).first(10), t, 4), ArgumentError);
    CHECK_THROWS_AS(sliding_correlation(std::span<const double>(a).first(10), std::span<const double>(b).first(10),
                                        std::span<const double>(t).first(10), 16),
                    ArgumentError);
}

TEST_CASE("bond force series of a stretched diatomic") {
    const double k = 0.1;
    const auto s = diatomic(k, 2.0, 10.0, 2.3);
    Trajectory t;
    t.times = {0.0};
    t.positions = {s.reference_positions()};
    t.velocities = {Vector::Zero(6)};
    t.photon_q = {0.0};
    t.photon_p = {0.0};
    // Stretched by 0.3: each atom feels k * 0.3 towards the other, so the
    // relative force along the bond is restoring.
    const auto f = bond_force_series(t, s, nullptr, {0, 1});
    CHECK(f[0] == doctest::Approx(-2.0 * k * 0.3));
    CHECK_THROWS_AS(bond_force_series(t, s, nullptr, {0, 0}), ArgumentError);
}

TEST_CASE("transition state of a reactive diatomic") {
    ReactiveTargets tg;
    tg.barrier = units::ev_to_hartree(0.35);
    tg.r0 = 3.6;
    tg.r_ts = 4.8;
    tg.r_outer = 5.4;
    tg.curvature_min = 0.2;
    tg.curvature_ts = -0.01;
    const double mass = 10.0;
    const auto s = reactive_diatomic(tg, mass);
    const auto& c = calibrate_reactive_bond(tg).coefficients();
    // Independent root of V'(x) on the barrier side.
    const double root = tg.r0 + bisect([&](double x) { return sextic_slope(c, x); }, 0.5, 1.6);
    const auto ts = find_transition_state(s);
    CHECK(std::abs(ts.bond_length - root) < 1e-8);
    CHECK(ts.barrier == doctest::Approx(0.35).epsilon(1e-8));
    const double mu = 0.5 * mass * units::amu_to_electron_mass;
    CHECK(ts.omega_b == doctest::Approx(units::hartree_to_cm(std::sqrt(0.01 / mu))).epsilon(1e-6));
    CHECK(ts.negative_modes == 1);
    CHECK(ts.gradient_norm < 1e-8);
}

TEST_CASE("minimization") {
    const auto s = harmonic_molecule(0.02);
    Vector start = s.reference_positions();
    start[0] += 0.1;
    start[7] -= 0.05;
    const auto r = minimize(s, start);
    CHECK(r.gradient_norm < 1e-10);
    CHECK(std::abs(r.energy) < 1e-12);
    const auto c = constrained_minimize(s, start, 0, 1, 2.8);
    const Vector& x = c.positions;
    CHECK((x.segment<3>(0) - x.segment<3>(3)).norm() == doctest::Approx(2.8).epsilon(1e-10));
    CHECK(c.energy > 0.0);
    CHECK_THROWS_AS(set_bond_length(s, start, 0, 1, -1.0), ArgumentError);
}

TEST_CASE("barrier frequency") {
    CHECK(barrier_frequency(-0.04, 4.0) == doctest::Approx(0.1));
    CHECK(barrier_frequency(0.04, 4.0) == doctest::Approx(0.1));
}

namespace {

ScanSetup tiny_setup(const ModelSystem& s) {
    ScanSetup setup;
    setup.positions = approach_geometry(s.reference_positions(), 0, 1, 0.7);
    for (std::uint64_t k = 0; k < 2; ++k) {
        SamplingSpec spec;
        spec.seed = 1;
        spec.stream = k;
        spec.aim = AimSpec{0, 1};
        setup.specs.push_back(spec);
    }
    setup.params.propagation = {units::fs_to_au(0.25), 400, 4};
    setup.params.monitor = default_reaction_monitor(s);
    setup.params.window = {0.0, units::fs_to_au(100.0)};
    return setup;
}

} // namespace

TEST_CASE("scans") {
    const auto s = build_pta_surrogate();
    const auto setup = tiny_setup(s);
    const auto rows = resonance_scan(s, setup, {856.0, 2000.0}, 1.132);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].baseline);
    CHECK(rows[0].lambda == 0.0);
    CHECK(!rows[1].baseline);
    CHECK(rows[1].omega_cm == 856.0);
    CHECK(rows[2].lambda == doctest::Approx(lambda_for_ratio(1.132, units::wavenumber_to_hartree(2000.0))));

    const auto coupling = coupling_scan(s, setup, 856.0, {0.0, 0.5});
    REQUIRE(coupling.size() == 3);
    CHECK(coupling[1].aggregates.mean_bond_length == rows[0].aggregates.mean_bond_length);
    CHECK(coupling[2].ratio == 0.5);

    CHECK_THROWS_AS(resonance_scan(s, setup, {}, 1.0), ArgumentError);
    CHECK_THROWS_AS(coupling_scan(s, setup, 856.0, {}), ArgumentError);
    CHECK_THROWS_AS(scan_row(s, setup, 856.0, -1.0), ArgumentError);
}
