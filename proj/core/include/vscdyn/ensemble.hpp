#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vscdyn/cavity.hpp"
#include "vscdyn/dynamics.hpp"
#include "vscdyn/model.hpp"

namespace vscdyn {

/// Point the projectile's momentum component along the projectile->target
/// axis towards the target.
struct AimSpec {
    std::size_t projectile = 0;
    std::size_t target = 0;
};

/// Second sampling stage: perturb a base draw with a small relative temperature.
struct ResampleSpec {
    std::uint64_t base_seed = 0;
    double t_rel = 20.0; // K
    std::size_t count = 1;
};

struct SamplingSpec {
    double temperature = 300.0; // K
    std::uint64_t seed = 0;
    /// Independent stream of `seed`; ensembles give trajectory k stream k.
    std::uint64_t stream = 0;
    std::optional<AimSpec> aim;
    std::optional<ResampleSpec> resample;
};

/// Maxwell-Boltzmann draw with per-particle sigma sqrt(kT / m), aim applied,
/// then centre-of-mass momentum removed.
Vector sample_velocities(const ModelSystem& system, const Vector& positions, const SamplingSpec& spec);

/// spec.resample->count sets of base + fresh draw at t_rel, each with its
/// centre-of-mass momentum removed. Member k draws from
/// resample_stream(spec.stream + k) of spec.seed.
std::vector<Vector> resample_around(const ModelSystem& system, const Vector& base_velocities,
                                    const SamplingSpec& spec);

/// Streams reserved for resampling perturbations, disjoint from the streams
/// used for primary draws.
constexpr std::uint64_t resample_stream(std::uint64_t k) { return (std::uint64_t{1} << 63) | k; }

/// The velocities a single trajectory starts from: a plain draw, or the
/// base draw (stream 0 of spec.resample->base_seed at spec.temperature)
/// perturbed by one t_rel draw.
Vector initial_velocities(const ModelSystem& system, const Vector& positions, const SamplingSpec& spec);

/// Reflects the projectile's velocity component along the axis if it points
/// away from the target. Speeds are preserved.
void aim_projectile(Vector& velocities, const Vector& positions, const AimSpec& aim);

void remove_com_momentum(const ModelSystem& system, Vector& velocities);
Vec3 com_momentum(const ModelSystem& system, const Vector& velocities);

/// Moves the projectile away from the target along their axis by `stretch` bohr.
Vector approach_geometry(const Vector& positions, std::size_t projectile, std::size_t target, double stretch);

struct TimeWindow {
    double start = 0.0; // a.u.
    double end = 0.0;   // a.u.
};

struct EnsembleParams {
    PropagationParams propagation;
    ReactionMonitor monitor;
    TimeWindow window;
    unsigned threads = 1;
    bool keep_trajectories = false;
};

struct TrajectoryOutcome {
    std::uint64_t seed = 0;
    ReactionEvent reaction;
    bool dissociated = false;
    double mean_bond_length = 0.0; // time average over the window, bohr
    std::optional<std::string> error;
    std::vector<double> bond_series; // reactive-bond length per frame
    std::optional<Trajectory> trajectory;
};

struct EnsembleAggregates {
    std::size_t n = 0;      // trajectories that completed
    std::size_t failed = 0; // trajectories that raised an integration error
    double reaction_fraction = 0.0;
    double mean_bond_length = 0.0;        // <<R>>, bohr
    std::optional<double> standard_error; // absent for n < 2
};

struct EnsembleResult {
    std::vector<double> frame_times; // a.u.
    std::vector<TrajectoryOutcome> trajectories;
    EnsembleAggregates aggregates;
};

/// Propagates one trajectory per spec from `positions`. With a cavity the
/// photon starts from the zero-field condition. Results are ordered like
/// `specs` and do not depend on the thread count.
EnsembleResult run_ensemble(const ModelSystem& system, const CavityMode* mode, const Vector& positions,
                            const std::vector<SamplingSpec>& specs, const EnsembleParams& params);

/// Time average of the reactive bond over the window per trajectory, then the
/// trajectory mean and standard error; reaction fraction counts crossings up
/// to the window end.
EnsembleAggregates reaction_statistics(const EnsembleResult& result, const TimeWindow& window);

/// Mean, and sample standard deviation / sqrt(n) when n >= 2.
std::pair<double, std::optional<double>> mean_and_standard_error(const std::vector<double>& values);

} // namespace vscdyn
