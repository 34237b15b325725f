#include <benchmark/benchmark.h>

#include "vscdyn/analysis/normal_modes.hpp"
#include "vscdyn/cavity.hpp"
#include "vscdyn/dynamics.hpp"
#include "vscdyn/ensemble.hpp"
#include "vscdyn/surrogate.hpp"
#include "vscdyn/units.hpp"

using namespace vscdyn;

namespace {

const CavityMode& resonant() {
    static const double w = units::wavenumber_to_hartree(856.0);
    static const CavityMode m(w, lambda_for_ratio(1.132, w), Vec3::UnitX());
    return m;
}

FullState thermal(const ModelSystem& s) {
    SamplingSpec spec;
    spec.seed = 1;
    FullState st;
    st.positions = approach_geometry(s.reference_positions(), 0, 1, 0.7);
    st.velocities = sample_velocities(s, st.positions, spec);
    st.photon = zero_field_init(resonant(), dipole(s, st.positions));
    return st;
}

void BM_Forces(benchmark::State& state) {
    const auto s = build_pta_surrogate();
    const Vector x = s.reference_positions();
    for (auto _ : state)
        benchmark::DoNotOptimize(forces(s, x));
}
BENCHMARK(BM_Forces);

void BM_VerletStep(benchmark::State& state) {
    const auto s = build_pta_surrogate();
    FullState st = thermal(s);
    const double dt = units::fs_to_au(0.25);
    for (auto _ : state) {
        st = velocity_verlet_step(s, &resonant(), st, dt);
        benchmark::DoNotOptimize(st.positions.data());
    }
}
BENCHMARK(BM_VerletStep);

void BM_Trajectory700fs(benchmark::State& state) {
    const auto s = build_pta_surrogate();
    const FullState st = thermal(s);
    const PropagationParams p{units::fs_to_au(0.25), 2800, 4};
    for (auto _ : state)
        benchmark::DoNotOptimize(propagate(s, &resonant(), st, p, default_reaction_monitor(s)));
}
BENCHMARK(BM_Trajectory700fs)->Unit(benchmark::kMillisecond);

void BM_Hessian(benchmark::State& state) {
    const auto s = build_pta_surrogate();
    const Vector x = s.reference_positions();
    for (auto _ : state)
        benchmark::DoNotOptimize(hessian(s, x));
}
BENCHMARK(BM_Hessian)->Unit(benchmark::kMicrosecond);

void BM_NormalModes(benchmark::State& state) {
    const auto s = build_pta_surrogate();
    const Vector x = s.reference_positions();
    for (auto _ : state)
        benchmark::DoNotOptimize(normal_modes(s, x));
}
BENCHMARK(BM_NormalModes)->Unit(benchmark::kMicrosecond);

void BM_PolaritonModes(benchmark::State& state) {
    const auto s = build_pta_surrogate();
    const auto bare = normal_modes(s, s.reference_positions());
    for (auto _ : state)
        benchmark::DoNotOptimize(polariton_modes(bare, resonant()));
}
BENCHMARK(BM_PolaritonModes)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
