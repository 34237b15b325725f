#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "vscdyn/cavity.hpp"
#include "vscdyn/model.hpp"

namespace vscdyn {

struct EnergyFrame {
    double potential = 0.0;
    double kinetic = 0.0;
    double cavity = 0.0;
    double total = 0.0;
};

/// Recorded phase-space history. Frames are spaced stride * dt apart.
struct Trajectory {
    double dt = 0.0;
    std::size_t stride = 1;
    std::vector<double> times; // a.u.
    std::vector<Vector> positions;
    std::vector<Vector> velocities;
    std::vector<double> photon_q;
    std::vector<double> photon_p;
    std::vector<EnergyFrame> energies;
    std::vector<Vec3> dipoles;

    std::size_t frames() const { return times.size(); }
    double frame_spacing() const { return dt * static_cast<double>(stride); }
    std::vector<double> bond_lengths(std::size_t i, std::size_t j) const;
};

struct ReactionEvent {
    bool occurred = false;
    double crossing_time = 0.0; // a.u., valid when occurred
    double threshold = 0.0;     // bohr
};

struct ReactionMonitor {
    std::size_t i = 0;
    std::size_t j = 0;
    double threshold = 0.0;
};

/// Monitor on the system's reactive bond with the barrier position as threshold.
ReactionMonitor default_reaction_monitor(const ModelSystem& system);

struct PropagationParams {
    double dt = 0.0; // a.u.
    std::size_t n_steps = 0;
    std::size_t stride = 4;
};

struct PropagationResult {
    Trajectory trajectory;
    ReactionEvent reaction;
    /// Some bond stretched beyond five barrier lengths during the run.
    bool dissociated = false;
};

/// One joint velocity-Verlet step of nuclei and photon. A null mode
/// propagates the bare molecule and leaves the photon untouched.
FullState velocity_verlet_step(const ModelSystem& system, const CavityMode* mode, const FullState& state, double dt);

PropagationResult propagate(const ModelSystem& system, const CavityMode* mode, const FullState& initial,
                            const PropagationParams& params, const std::optional<ReactionMonitor>& monitor = {});

/// First frame where |R_i - R_j| exceeds the threshold; the crossing time is
/// linearly interpolated between the bracketing frames.
ReactionEvent detect_reaction(const Trajectory& trajectory, std::size_t i, std::size_t j, double threshold);

} // namespace vscdyn
