#include "vscdyn/dynamics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vscdyn/error.hpp"

namespace vscdyn {

namespace {

struct Accelerations {
    Vector nuclear;
    double photon = 0.0;
};

// Evaluates nuclear and photon accelerations for one system/mode pair.
class ForceEvaluator {
public:
    ForceEvaluator(const ModelSystem& system, const CavityMode* mode)
        : system_(system), mode_(mode), inv_mass_(system.coordinate_masses().cwiseInverse()) {
        if (mode_ != nullptr)
            dipole_gradient_ = dipole_gradient(system_);
    }

    Accelerations operator()(const Vector& x, const PhotonState& photon) const {
        Vector f = forces(system_, x);
        check(f, "matter force");
        Accelerations a;
        if (mode_ != nullptr) {
            const Vec3 mu = dipole(system_, x);
            const Vector fc = nuclear_cavity_force(*mode_, photon, mu, dipole_gradient_);
            check(fc, "cavity force");
            f += fc;
            a.photon = photon_force(*mode_, photon, mu);
            if (!std::isfinite(a.photon))
                throw IntegrationError("non-finite photon acceleration");
        }
        a.nuclear = f.cwiseProduct(inv_mass_);
        return a;
    }

private:
    static void check(const Vector& f, const char* term) {
        for (Eigen::Index k = 0; k < f.size(); ++k)
            if (!std::isfinite(f[k]))
                throw IntegrationError(std::string("non-finite ") + term + " on particle " + std::to_string(k / 3));
    }

    const ModelSystem& system_;
    const CavityMode* mode_;
    Vector inv_mass_;
    Matrix dipole_gradient_;
};

void require_state(const ModelSystem& system, const FullState& state) {
    if (static_cast<std::size_t>(state.positions.size()) != system.dof() ||
        static_cast<std::size_t>(state.velocities.size()) != system.dof())
        throw ArgumentError("state arrays do not match the system size");
}

// Advances state in place using the accelerations at its start, then
// overwrites acc with the accelerations at the end of the step.
void step_in_place(const ForceEvaluator& eval, bool with_photon, FullState& s, Accelerations& acc, double dt) {
    const double half = 0.5 * dt;
    s.velocities += half * acc.nuclear;
    s.positions += dt * s.velocities;
    if (with_photon) {
        s.photon.p += half * acc.photon;
        s.photon.q += dt * s.photon.p;
    }
    acc = eval(s.positions, s.photon);
    s.velocities += half * acc.nuclear;
    if (with_photon)
        s.photon.p += half * acc.photon;
    s.time += dt;
    if (!s.positions.allFinite() || !s.velocities.allFinite())
        throw IntegrationError("non-finite nuclear state after step");
}

EnergyFrame energies(const ModelSystem& system, const CavityMode* mode, const FullState& s, const Vec3& mu) {
    EnergyFrame e;
    e.potential = potential_energy(system, s.positions);
    e.kinetic = kinetic_energy(system, s.velocities);
    e.cavity = mode != nullptr ? cavity_energy(*mode, s.photon, mu) : 0.0;
    e.total = e.potential + e.kinetic + e.cavity;
    return e;
}

void record(Trajectory& t, const ModelSystem& system, const CavityMode* mode, const FullState& s) {
    const Vec3 mu = dipole(system, s.positions);
    t.times.push_back(s.time);
    t.positions.push_back(s.positions);
    t.velocities.push_back(s.velocities);
    t.photon_q.push_back(s.photon.q);
    t.photon_p.push_back(s.photon.p);
    t.energies.push_back(energies(system, mode, s, mu));
    t.dipoles.push_back(mu);
}

bool any_bond_beyond(const ModelSystem& system, const Vector& x, double limit) {
    for (const auto& b : system.bonds())
        if (bond_length(x, b.i, b.j) > limit)
            return true;
    return false;
}

} // namespace

std::vector<double> Trajectory::bond_lengths(std::size_t i, std::size_t j) const {
    std::vector<double> r;
    r.reserve(positions.size());
    for (const auto& x : positions)
        r.push_back(bond_length(x, i, j));
    return r;
}

ReactionMonitor default_reaction_monitor(const ModelSystem& system) {
    const auto& bond = system.reactive_bond();
    return {bond.i, bond.j, system.reactive_potential().r_ts()};
}

FullState velocity_verlet_step(const ModelSystem& system, const CavityMode* mode, const FullState& state, double dt) {
    require_state(system, state);
    if (!std::isfinite(dt) || dt == 0.0)
        throw ArgumentError("time step must be finite and non-zero");
    const ForceEvaluator eval(system, mode);
    FullState next = state;
    Accelerations acc = eval(next.positions, next.photon);
    step_in_place(eval, mode != nullptr, next, acc, dt);
    return next;
}

PropagationResult propagate(const ModelSystem& system, const CavityMode* mode, const FullState& initial,
                            const PropagationParams& params, const std::optional<ReactionMonitor>& monitor) {
    require_state(system, initial);
    if (!(params.dt > 0.0) || !std::isfinite(params.dt))
        throw ArgumentError("time step must be positive");
    if (params.n_steps < 1)
        throw ArgumentError("propagation needs at least one step");
    if (params.stride < 1)
        throw ArgumentError("record stride must be at least 1");

    const ForceEvaluator eval(system, mode);
    const double dissociation_limit = system.has_reactive_bond()
                                          ? 5.0 * system.reactive_potential().r_ts()
                                          : std::numeric_limits<double>::infinity();

    PropagationResult result;
    Trajectory& traj = result.trajectory;
    traj.dt = params.dt;
    traj.stride = params.stride;
    const std::size_t frames = params.n_steps / params.stride + 1;
    traj.times.reserve(frames);
    traj.positions.reserve(frames);
    traj.velocities.reserve(frames);

    FullState s = initial;
    Accelerations acc = eval(s.positions, s.photon);
    record(traj, system, mode, s);
    for (std::size_t step = 1; step <= params.n_steps; ++step) {
        step_in_place(eval, mode != nullptr, s, acc, params.dt);
        if (!result.dissociated && any_bond_beyond(system, s.positions, dissociation_limit))
            result.dissociated = true;
        if (step % params.stride == 0)
            record(traj, system, mode, s);
    }

    if (monitor)
        result.reaction = detect_reaction(traj, monitor->i, monitor->j, monitor->threshold);
    return result;
}

ReactionEvent detect_reaction(const Trajectory& trajectory, std::size_t i, std::size_t j, double threshold) {
    if (!(threshold >= 0.0))
        throw ArgumentError("reaction threshold must be non-negative");
    if (trajectory.frames() == 0)
        throw ArgumentError("trajectory has no frames");
    const auto n = static_cast<std::size_t>(trajectory.positions.front().size() / 3);
    if (i >= n || j >= n || i == j)
        throw ArgumentError("invalid bond particle indices");

    ReactionEvent ev;
    ev.threshold = threshold;
    double prev_r = 0.0;
    for (std::size_t k = 0; k < trajectory.frames(); ++k) {
        const double r = bond_length(trajectory.positions[k], i, j);
        if (r > threshold) {
            ev.occurred = true;
            if (k == 0) {
                ev.crossing_time = trajectory.times[0];
            } else {
                const double t0 = trajectory.times[k - 1];
                const double t1 = trajectory.times[k];
                ev.crossing_time = t0 + (threshold - prev_r) / (r - prev_r) * (t1 - t0);
            }
            return ev;
        }
        prev_r = r;
    }
    return ev;
}

} // namespace vscdyn
