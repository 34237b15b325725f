#include "vscdyn/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "vscdyn/error.hpp"
#include "vscdyn/rng.hpp"
#include "vscdyn/units.hpp"

namespace vscdyn {

namespace {

void require_temperature(double t) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw ArgumentError("temperature must be non-negative");
}

Vector thermal_draw(const ModelSystem& system, double temperature, NormalRng& rng) {
    Vector v(static_cast<Eigen::Index>(system.dof()));
    const auto& m = system.masses();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double sigma = std::sqrt(units::boltzmann * temperature / m[i]);
        for (Eigen::Index c = 0; c < 3; ++c)
            v[3 * i + c] = sigma * rng.normal();
    }
    return v;
}

std::vector<std::size_t> window_frames(const std::vector<double>& times, const TimeWindow& w) {
    if (times.empty())
        throw ArgumentError("no frames recorded");
    if (!(w.end > w.start))
        throw ArgumentError("analysis window is empty");
    const double slack = 1e-9 * std::max(1.0, std::abs(times.back()));
    if (w.start < times.front() - slack || w.end > times.back() + slack)
        throw ArgumentError("analysis window extends beyond the recorded data");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] >= w.start - slack && times[k] <= w.end + slack)
            idx.push_back(k);
    if (idx.empty())
        throw ArgumentError("analysis window contains no frames");
    return idx;
}

double window_average(const std::vector<double>& series, const std::vector<std::size_t>& idx) {
    double sum = 0.0;
    for (std::size_t k : idx)
        sum += series.at(k);
    return sum / static_cast<double>(idx.size());
}

} // namespace

Vec3 com_momentum(const ModelSystem& system, const Vector& velocities) {
    Vec3 p = Vec3::Zero();
    const auto& m = system.masses();
    for (Eigen::Index i = 0; i < m.size(); ++i)
        p += m[i] * velocities.segment<3>(3 * i);
    return p;
}

void remove_com_momentum(const ModelSystem& system, Vector& velocities) {
    const Vec3 v_com = com_momentum(system, velocities) / system.total_mass();
    for (Eigen::Index i = 0; i < system.masses().size(); ++i)
        velocities.segment<3>(3 * i) -= v_com;
}

void aim_projectile(Vector& velocities, const Vector& positions, const AimSpec& aim) {
    const auto n = static_cast<std::size_t>(positions.size() / 3);
    if (aim.projectile >= n || aim.target >= n || aim.projectile == aim.target)
        throw ArgumentError("aim needs two distinct valid particle indices");
    const auto p = static_cast<Eigen::Index>(3 * aim.projectile);
    const auto t = static_cast<Eigen::Index>(3 * aim.target);
    const Vec3 axis = positions.segment<3>(t) - positions.segment<3>(p);
    if (axis.norm() == 0.0)
        throw ArgumentError("projectile and target coincide");
    const Vec3 u = axis.normalized();
    const double along = velocities.segment<3>(p).dot(u);
    if (along < 0.0)
        velocities.segment<3>(p) -= 2.0 * along * u;
}

Vector sample_velocities(const ModelSystem& system, const Vector& positions, const SamplingSpec& spec) {
    require_temperature(spec.temperature);
    if (static_cast<std::size_t>(positions.size()) != system.dof())
        throw ArgumentError("positions have the wrong length");
    NormalRng rng(spec.seed, spec.stream);
    Vector v = thermal_draw(system, spec.temperature, rng);
    if (spec.aim)
        aim_projectile(v, positions, *spec.aim);
    remove_com_momentum(system, v);
    return v;
}

std::vector<Vector> resample_around(const ModelSystem& system, const Vector& base_velocities,
                                    const SamplingSpec& spec) {
    if (!spec.resample)
        throw ArgumentError("sampling spec has no resample block");
    require_temperature(spec.resample->t_rel);
    if (static_cast<std::size_t>(base_velocities.size()) != system.dof())
        throw ArgumentError("base velocities have the wrong length");
    std::vector<Vector> out;
    out.reserve(spec.resample->count);
    for (std::size_t k = 0; k < spec.resample->count; ++k) {
        NormalRng rng(spec.seed, resample_stream(spec.stream + k));
        Vector v = base_velocities + thermal_draw(system, spec.resample->t_rel, rng);
        remove_com_momentum(system, v);
        out.push_back(std::move(v));
    }
    return out;
}

Vector initial_velocities(const ModelSystem& system, const Vector& positions, const SamplingSpec& spec) {
    if (!spec.resample)
        return sample_velocities(system, positions, spec);
    SamplingSpec base = spec;
    base.seed = spec.resample->base_seed;
    base.stream = 0;
    base.resample.reset();
    SamplingSpec member = spec;
    member.resample->count = 1;
    return resample_around(system, sample_velocities(system, positions, base), member).front();
}

Vector approach_geometry(const Vector& positions, std::size_t projectile, std::size_t target, double stretch) {
    const auto n = static_cast<std::size_t>(positions.size() / 3);
    if (projectile >= n || target >= n || projectile == target)
        throw ArgumentError("approach needs two distinct valid particle indices");
    Vector x = positions;
    const auto p = static_cast<Eigen::Index>(3 * projectile);
    const auto t = static_cast<Eigen::Index>(3 * target);
    const Vec3 u = (x.segment<3>(p) - x.segment<3>(t)).normalized();
    x.segment<3>(p) += stretch * u;
    return x;
}

std::pair<double, std::optional<double>> mean_and_standard_error(const std::vector<double>& values) {
    if (values.empty())
        throw ArgumentError("no values to average");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= n;
    if (values.size() < 2)
        return {mean, std::nullopt};
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

EnsembleResult run_ensemble(const ModelSystem& system, const CavityMode* mode, const Vector& positions,
                            const std::vector<SamplingSpec>& specs, const EnsembleParams& params) {
    if (specs.empty())
        throw ArgumentError("ensemble needs at least one sampling spec");
    if (static_cast<std::size_t>(positions.size()) != system.dof())
        throw ArgumentError("positions have the wrong length");

    // Validate every spec up front so bad input is an argument error, not a
    // per-trajectory failure.
    for (const auto& s : specs) {
        require_temperature(s.temperature);
        if (s.resample)
            require_temperature(s.resample->t_rel);
    }

    EnsembleResult result;
    result.trajectories.resize(specs.size());

    auto work = [&](std::size_t k) {
        TrajectoryOutcome& out = result.trajectories[k];
        out.seed = specs[k].seed;
        try {
            FullState init;
            init.positions = positions;
            init.velocities = initial_velocities(system, positions, specs[k]);
            if (mode != nullptr)
                init.photon = zero_field_init(*mode, dipole(system, positions));
            auto run = propagate(system, mode, init, params.propagation, params.monitor);
            out.reaction = run.reaction;
            out.dissociated = run.dissociated;
            out.bond_series = run.trajectory.bond_lengths(params.monitor.i, params.monitor.j);
            if (params.keep_trajectories)
                out.trajectory = std::move(run.trajectory);
        } catch (const IntegrationError& e) {
            out.error = e.what();
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(specs.size())));
    if (threads == 1) {
        for (std::size_t k = 0; k < specs.size(); ++k)
            work(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < threads; ++w)
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t k = next++; k < specs.size(); k = next++)
                            work(k);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
        }
        for (const auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    const std::size_t frames = params.propagation.n_steps / params.propagation.stride + 1;
    result.frame_times.resize(frames);
    for (std::size_t k = 0; k < frames; ++k)
        result.frame_times[k] = static_cast<double>(k * params.propagation.stride) * params.propagation.dt;
    const auto idx = window_frames(result.frame_times, params.window);
    for (auto& t : result.trajectories)
        if (!t.error)
            t.mean_bond_length = window_average(t.bond_series, idx);
    result.aggregates = reaction_statistics(result, params.window);
    return result;
}

EnsembleAggregates reaction_statistics(const EnsembleResult& result, const TimeWindow& window) {
    const auto idx = window_frames(result.frame_times, window);
    EnsembleAggregates agg;
    std::vector<double> means;
    std::size_t reacted = 0;
    for (const auto& t : result.trajectories) {
        if (t.error) {
            ++agg.failed;
            continue;
        }
        means.push_back(window_average(t.bond_series, idx));
        if (t.reaction.occurred && t.reaction.crossing_time <= window.end)
            ++reacted;
    }
    agg.n = means.size();
    if (agg.n == 0)
        return agg;
    agg.reaction_fraction = static_cast<double>(reacted) / static_cast<double>(agg.n);
    const auto [mean, se] = mean_and_standard_error(means);
    agg.mean_bond_length = mean;
    agg.standard_error = se;
    return agg;
}

} // namespace vscdyn
