#include "vscdyn_app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "vscdyn/analysis/correlation.hpp"
#include "vscdyn/analysis/normal_modes.hpp"
#include "vscdyn/analysis/occupation.hpp"
#include "vscdyn/analysis/scan.hpp"
#include "vscdyn/analysis/spectrum.hpp"
#include "vscdyn/analysis/transition_state.hpp"
#include "vscdyn/error.hpp"
#include "vscdyn/units.hpp"
#include "vscdyn_app/io.hpp"

namespace vscdyn::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Output {
    fs::path dir;
    std::string ref;
    bool csv;
    bool json;
};

Output prepare(const RunConfig& config, const std::string& command) {
    Output o{config.outputs.directory, "manifest.json config_hash=" + config_hash(config), config.outputs.csv,
             config.outputs.json};
    ensure_directory(o.dir);
    write_json(o.dir / "manifest.json", make_manifest(config, command));
    return o;
}

std::optional<CavityMode> cavity_of(const RunConfig& config) {
    if (!config.cavity)
        return std::nullopt;
    return config.cavity->mode();
}

std::string frequency_tag(double cm) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "mode_%.0fcm", cm);
    return buf;
}

json aggregates_json(const EnsembleAggregates& a) {
    json j{{"n", a.n},
           {"failed", a.failed},
           {"reaction_fraction", a.reaction_fraction},
           {"mean_bond_length_A", units::bohr_to_ang(a.mean_bond_length)}};
    j["standard_error_A"] = a.standard_error ? json(units::bohr_to_ang(*a.standard_error)) : json(nullptr);
    return j;
}

Cell optional_cell(const std::optional<double>& v) {
    if (v)
        return *v;
    return std::string();
}

} // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e))
        return exit_validation;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e))
        return exit_io;
    return exit_runtime;
}

int cmd_spectrum(const RunConfig& config) {
    const ModelSystem system = build_system(config);
    const Output out = prepare(config, "spectrum");
    const Vector& x = system.reference_positions();
    const auto& bond = system.reactive_bond();
    const NormalModes bare = normal_modes(system, x);
    const auto overlaps = bond_overlaps(bare, x, bond.i, bond.j);
    const CavityConfig cav = config.cavity.value_or(CavityConfig{});
    const auto& sc = config.spectrum;

    std::vector<double> grid;
    for (double w = sc.grid_min_cm; w <= sc.grid_max_cm + 1e-9; w += sc.grid_step_cm)
        grid.push_back(w);

    CsvTable lines({"lambda_au", "ratio", "mode", "frequency_cm", "strength_au", "si_c_weight", "photon_weight"});
    std::vector<std::string> curve_header{"frequency_cm"};
    std::vector<std::vector<double>> curves;
    json summary = json::array();

    for (double lambda : sc.lambda_list) {
        const CavityMode mode(units::wavenumber_to_hartree(cav.omega_cm), lambda, cav.polarization, cav.bilinear,
                              cav.self_polarization);
        const bool bare_only = lambda == 0.0;
        const NormalModes nm = bare_only ? bare : polariton_modes(bare, mode);
        std::vector<double> w = bare_only ? overlaps : polariton_overlaps(nm, overlaps);
        for (double& v : w)
            v = std::abs(v);
        const Spectrum s = ir_spectrum(nm, cav.polarization, sc.broadening_cm, sc.lineshape, w);
        const double ratio = coupling_ratio(lambda, mode.omega());
        json entry{{"lambda_au", lambda}, {"ratio", ratio}, {"lines", json::array()}};
        for (const auto& l : s.lines) {
            const double pw = nm.photon_weight.size() > 0 ? nm.photon_weight[static_cast<Eigen::Index>(l.mode)] : 0.0;
            lines.add({lambda, ratio, static_cast<std::int64_t>(l.mode), l.frequency, l.strength, l.si_c_weight, pw});
            entry["lines"].push_back({{"frequency_cm", l.frequency}, {"strength_au", l.strength}});
        }
        summary.push_back(entry);
        curve_header.push_back("S_lambda_" + format_double(lambda) + "_au_per_cm");
        curves.push_back(s.curve(grid));
    }

    if (out.csv) {
        lines.write(out.dir / "spectrum_lines.csv", out.ref);
        CsvTable curve(curve_header);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            std::vector<Cell> row{grid[g]};
            for (const auto& c : curves)
                row.emplace_back(c[g]);
            curve.add(std::move(row));
        }
        curve.write(out.dir / "spectrum_curve.csv", out.ref);
    }
    if (out.json)
        write_json(out.dir / "spectrum.json",
                   {{"omega_c_cm", cav.omega_cm}, {"broadening_cm", sc.broadening_cm}, {"spectra", summary}});
    return exit_ok;
}

int cmd_run(const RunConfig& config) {
    const ModelSystem system = build_system(config);
    const Output out = prepare(config, "run");
    const ScanSetup setup = scan_setup(config, system, 1);
    const auto mode = cavity_of(config);

    FullState init;
    init.positions = setup.positions;
    init.velocities = initial_velocities(system, setup.positions, setup.specs.front());
    if (mode)
        init.photon = zero_field_init(*mode, dipole(system, setup.positions));
    const auto run = propagate(system, mode ? &*mode : nullptr, init, setup.params.propagation, setup.params.monitor);
    const auto& t = run.trajectory;

    double drift = 0.0;
    const double e0 = t.energies.front().total;
    for (const auto& e : t.energies)
        drift = std::max(drift, std::abs(e.total - e0));

    if (out.csv)
        write_trajectory_csv(out.dir / "trajectory.csv", t, system, out.ref);
    if (out.json) {
        json s{{"seed", config.ensemble.seed},
               {"frames", t.frames()},
               {"reacted", run.reaction.occurred},
               {"threshold_A", units::bohr_to_ang(run.reaction.threshold)},
               {"dissociated", run.dissociated},
               {"max_energy_error_eV", units::hartree_to_eV(drift)}};
        s["crossing_time_fs"] = run.reaction.occurred ? json(units::au_to_fs(run.reaction.crossing_time)) : json(nullptr);
        if (mode)
            s["lambda_au"] = mode->lambda();
        write_json(out.dir / "run.json", s);
    }
    return exit_ok;
}

int cmd_ensemble(const RunConfig& config, unsigned threads) {
    const ModelSystem system = build_system(config);
    const Output out = prepare(config, "ensemble");
    const ScanSetup setup = scan_setup(config, system, threads);
    const auto mode = cavity_of(config);
    const EnsembleResult result =
        run_ensemble(system, mode ? &*mode : nullptr, setup.positions, setup.specs, setup.params);

    if (out.csv) {
        CsvTable rows({"trajectory", "seed", "stream", "reacted", "crossing_time_fs", "dissociated", "mean_bond_A",
                       "error"});
        for (std::size_t k = 0; k < result.trajectories.size(); ++k) {
            const auto& t = result.trajectories[k];
            const bool ok = !t.error;
            rows.add({static_cast<std::int64_t>(k), std::to_string(t.seed),
                      static_cast<std::int64_t>(setup.specs[k].stream),
                      static_cast<std::int64_t>(ok && t.reaction.occurred),
                      optional_cell(ok && t.reaction.occurred
                                        ? std::optional<double>(units::au_to_fs(t.reaction.crossing_time))
                                        : std::nullopt),
                      static_cast<std::int64_t>(t.dissociated),
                      optional_cell(ok ? std::optional<double>(units::bohr_to_ang(t.mean_bond_length))
                                       : std::nullopt),
                      t.error.value_or("")});
        }
        rows.write(out.dir / "ensemble.csv", out.ref);

        // Trajectory-averaged reactive-bond length per frame.
        CsvTable series({"time_fs", "mean_bond_A", "standard_error_A"});
        for (std::size_t f = 0; f < result.frame_times.size(); ++f) {
            std::vector<double> r;
            for (const auto& t : result.trajectories)
                if (!t.error)
                    r.push_back(t.bond_series[f]);
            const auto [m, se] = mean_and_standard_error(r);
            series.add({units::au_to_fs(result.frame_times[f]), units::bohr_to_ang(m),
                        optional_cell(se ? std::optional<double>(units::bohr_to_ang(*se)) : std::nullopt)});
        }
        series.write(out.dir / "bond_series.csv", out.ref);

        if (config.ensemble.keep_trajectories) {
            ensure_directory(out.dir / "trajectories");
            for (std::size_t k = 0; k < result.trajectories.size(); ++k) {
                const auto& t = result.trajectories[k];
                if (!t.trajectory)
                    continue;
                char name[32];
                std::snprintf(name, sizeof name, "traj_%04zu.csv", k);
                write_trajectory_csv(out.dir / "trajectories" / name, *t.trajectory, system, out.ref);
            }
        }
    }
    if (out.json) {
        json s = aggregates_json(result.aggregates);
        s["window_fs"] = {config.ensemble.window_start_fs, config.ensemble.window_end_fs};
        s["lambda_au"] = mode ? json(mode->lambda()) : json(0.0);
        write_json(out.dir / "summary.json", s);
    }
    return exit_ok;
}

int cmd_scan(const RunConfig& config, unsigned threads) {
    const auto& sc = config.scan;
    if (sc.omega_list_cm.empty() && sc.ratio_list.empty())
        throw ConfigError("scan needs 'scan.omega_list_cm' or 'scan.ratio_list'");
    const ModelSystem system = build_system(config);
    const Output out = prepare(config, "scan");
    ScanSetup setup = scan_setup(config, system, threads);
    setup.params.keep_trajectories = false;

    auto emit = [&](const std::vector<ScanRow>& rows, const std::string& stem) {
        if (out.csv) {
            CsvTable t({"baseline", "omega_cm", "ratio", "lambda_au", "n", "failed", "reaction_fraction",
                        "mean_bond_A", "standard_error_A"});
            for (const auto& r : rows)
                t.add({static_cast<std::int64_t>(r.baseline), r.omega_cm, r.ratio, r.lambda,
                       static_cast<std::int64_t>(r.aggregates.n), static_cast<std::int64_t>(r.aggregates.failed),
                       r.aggregates.reaction_fraction, units::bohr_to_ang(r.aggregates.mean_bond_length),
                       optional_cell(r.aggregates.standard_error
                                         ? std::optional<double>(units::bohr_to_ang(*r.aggregates.standard_error))
                                         : std::nullopt)});
            t.write(out.dir / (stem + ".csv"), out.ref);
        }
        if (out.json) {
            json j = json::array();
            for (const auto& r : rows) {
                json e = aggregates_json(r.aggregates);
                e["baseline"] = r.baseline;
                e["omega_cm"] = r.omega_cm;
                e["ratio"] = r.ratio;
                e["lambda_au"] = r.lambda;
                j.push_back(e);
            }
            write_json(out.dir / (stem + ".json"), j);
        }
    };

    if (!sc.omega_list_cm.empty())
        emit(resonance_scan(system, setup, sc.omega_list_cm, sc.ratio), "resonance_scan");
    if (!sc.ratio_list.empty())
        emit(coupling_scan(system, setup, sc.omega_fixed_cm, sc.ratio_list), "coupling_scan");
    return exit_ok;
}

namespace {

std::vector<Trajectory> load_trajectories(const fs::path& dir, const ModelSystem& system) {
    if (!fs::is_directory(dir))
        throw IoError("trajectory directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename().string().starts_with("traj_"))
            files.push_back(e.path());
    if (files.empty())
        throw IoError("no traj_*.csv files in '" + dir.string() + "'");
    std::sort(files.begin(), files.end());
    std::vector<Trajectory> out;
    for (const auto& f : files)
        out.push_back(read_trajectory_csv(f, system));
    return out;
}

OccupationMap averaged_occupation(const std::vector<Trajectory>& trajs, const NormalModes& nm, const Vector& ref) {
    std::vector<OccupationMap> maps;
    for (const auto& t : trajs)
        maps.push_back(mode_occupation(t, nm, ref));
    return average_occupation(maps);
}

} // namespace

int cmd_analyze(const RunConfig& config) {
    const auto& ac = config.analyze;
    if (ac.trajectories.empty())
        throw ConfigError("analyze needs 'analyze.trajectories'");
    const ModelSystem system = build_system(config);
    const auto trajs = load_trajectories(ac.trajectories, system);
    std::vector<Trajectory> refs;
    if (ac.reference)
        refs = load_trajectories(*ac.reference, system);
    const Output out = prepare(config, "analyze");

    const Vector& x0 = system.reference_positions();
    const NormalModes nm = normal_modes(system, x0);
    const auto& rb = system.reactive_bond();
    const auto weights = sic_weighted_spectrum(nm, x0, rb.i, rb.j);
    const OccupationMap occ = averaged_occupation(trajs, nm, x0);

    std::vector<std::string> header{"time_fs", "photon_q_au"};
    for (double f : occ.frequencies)
        header.push_back(frequency_tag(f));
    json summary;

    if (out.csv) {
        CsvTable t(header);
        for (Eigen::Index f = 0; f < occ.normalized.rows(); ++f) {
            std::vector<Cell> row{units::au_to_fs(occ.times[static_cast<std::size_t>(f)]),
                                  occ.photon_q[static_cast<std::size_t>(f)]};
            for (Eigen::Index c = 0; c < occ.normalized.cols(); ++c)
                row.emplace_back(occ.normalized(f, c));
            t.add(std::move(row));
        }
        t.write(out.dir / "occupation.csv", out.ref);
    }

    if (!refs.empty()) {
        const OccupationMap occ_ref = averaged_occupation(refs, nm, x0);
        const OccupationDifference d = occupation_difference(occ, occ_ref);
        json acc = json::array();
        CsvTable bars({"mode", "frequency_cm", "si_c_weight", "accumulated_fs"});
        for (std::size_t c = 0; c < d.modes.size(); ++c) {
            const double a = units::au_to_fs(d.accumulated[c]);
            bars.add({static_cast<std::int64_t>(d.modes[c]), d.frequencies[c], weights[d.modes[c]], a});
            acc.push_back({{"mode", d.modes[c]}, {"frequency_cm", d.frequencies[c]}, {"accumulated_fs", a}});
        }
        summary["accumulated_difference"] = acc;
        if (out.csv) {
            header[1] = "photon_dq_au";
            CsvTable t(header);
            for (Eigen::Index f = 0; f < d.difference.rows(); ++f) {
                std::vector<Cell> row{units::au_to_fs(d.times[static_cast<std::size_t>(f)]),
                                      d.photon_difference[static_cast<std::size_t>(f)]};
                for (Eigen::Index c = 0; c < d.difference.cols(); ++c)
                    row.emplace_back(d.difference(f, c));
                t.add(std::move(row));
            }
            t.write(out.dir / "occupation_difference.csv", out.ref);
            bars.write(out.dir / "occupation_accumulated.csv", out.ref);
        }
    }

    // Force correlation between the reactive bond and every other bond.
    const auto mode = cavity_of(config);
    const auto& bonds = system.bonds();
    CsvTable corr({"bond_a", "bond_b", "integrated_correlation", "standard_error", "degenerate_windows"});
    json cj = json::array();
    for (std::size_t b = 0; b < bonds.size(); ++b) {
        if (b == system.reactive_bond_index())
            continue;
        std::vector<double> values;
        std::int64_t degenerate = 0;
        for (const auto& t : trajs) {
            if (t.frames() < ac.correlation_window)
                throw ArgumentError("trajectory shorter than the correlation window");
            const auto c = bond_force_correlation(t, system, mode ? &*mode : nullptr, {rb.i, rb.j},
                                                  {bonds[b].i, bonds[b].j}, ac.correlation_window);
            values.push_back(c.integrated);
            degenerate += std::count(c.degenerate.begin(), c.degenerate.end(), true);
        }
        const auto [m, se] = mean_and_standard_error(values);
        const auto& P = system.particles();
        const std::string a = P[rb.i].label + "-" + P[rb.j].label;
        const std::string bb = P[bonds[b].i].label + "-" + P[bonds[b].j].label;
        corr.add({a, bb, m, optional_cell(se), degenerate});
        cj.push_back({{"bond_a", a}, {"bond_b", bb}, {"integrated", m}});
    }
    summary["bond_force_correlation"] = cj;
    summary["trajectories"] = trajs.size();
    summary["reference_trajectories"] = refs.size();
    if (out.csv)
        corr.write(out.dir / "bond_correlation.csv", out.ref);
    if (out.json)
        write_json(out.dir / "analysis.json", summary);
    return exit_ok;
}

int cmd_calibrate(const RunConfig& config) {
    const SurrogateParameters params =
        config.system.builtin ? SurrogateParameters{} : config.system.surrogate;
    SurrogateReport report;
    const ModelSystem system = build_surrogate(params, &report);
    const Output out = prepare(config, "calibrate");
    const auto& ts = report.transition_state;
    const auto& rp = system.reactive_potential();
    const auto& bt = report.bare_targets;

    json j;
    j["k_sif"] = report.parameters.k_sif;
    j["target_mode_cm"] = report.target_mode_cm;
    j["target_mode_si_c_weight"] = report.target_mode_weight;
    j["reactive_coefficients"] = rp.coefficients();
    j["reactive_r0_A"] = units::bohr_to_ang(rp.r0());
    j["reactive_r_ts_A"] = units::bohr_to_ang(rp.r_ts());
    j["reactive_r_outer_A"] = units::bohr_to_ang(rp.r_outer());
    j["bare_barrier_eV"] = units::hartree_to_eV(bt.barrier);
    j["bare_curvature_ts_au"] = bt.curvature_ts;
    j["transition_state"] = {{"barrier_eV", ts.barrier},
                             {"omega_b_cm", ts.omega_b},
                             {"bond_length_A", units::bohr_to_ang(ts.bond_length)},
                             {"curvature_au", ts.curvature},
                             {"gradient_norm_au", ts.gradient_norm},
                             {"negative_modes", ts.negative_modes}};
    if (out.json)
        write_json(out.dir / "calibration.json", j);
    if (out.csv) {
        CsvTable scan({"bond_length_A", "relaxed_energy_eV"});
        for (std::size_t k = 0; k < ts.scan_lengths.size(); ++k)
            scan.add({units::bohr_to_ang(ts.scan_lengths[k]), units::hartree_to_eV(ts.scan_energies[k])});
        scan.write(out.dir / "ts_scan.csv", out.ref);
    }
    std::printf("barrier %.6f eV, omega_b %.4f cm^-1, target mode %.4f cm^-1 (Si-C weight %.3f)\n", ts.barrier,
                ts.omega_b, report.target_mode_cm, report.target_mode_weight);
    return exit_ok;
}

int cmd_model_check(const RunConfig& config) {
    const ModelSystem system = build_system(config);
    const Output out = prepare(config, "model-check");
    const Vector& x0 = system.reference_positions();
    const auto mode = cavity_of(config);

    // Finite-difference force check on displaced geometries, cavity included.
    std::mt19937_64 engine(config.ensemble.seed);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    const double h = 1e-4;
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
        Vector x = x0;
        for (Eigen::Index k = 0; k < x.size(); ++k)
            x[k] += jitter(engine);
        PhotonState photon{jitter(engine) * 10.0, 0.0};
        auto energy = [&](const Vector& y) {
            return potential_energy(system, y) + (mode ? cavity_energy(*mode, photon, dipole(system, y)) : 0.0);
        };
        Vector f = forces(system, x);
        if (mode)
            f += nuclear_cavity_force(*mode, photon, system, x);
        Vector fd(x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            Vector a = x, b = x;
            a[k] += h;
            b[k] -= h;
            fd[k] = -(energy(a) - energy(b)) / (2 * h);
        }
        worst = std::max(worst, (fd - f).lpNorm<Eigen::Infinity>() / f.lpNorm<Eigen::Infinity>());
    }

    const NormalModes nm = normal_modes(system, x0);
    const auto& rb = system.reactive_bond();
    const auto weights = sic_weighted_spectrum(nm, x0, rb.i, rb.j);
    const double charge = system.total_charge();
    const bool forces_ok = worst < 1e-6;
    const bool charge_ok = std::abs(charge + 1.0) < 1e-12;
    const double target = config.system.surrogate.target_mode_cm;
    bool mode_ok = false;
    for (std::size_t j : nm.vibrational())
        mode_ok |= std::abs(nm.frequencies[static_cast<Eigen::Index>(j)] - target) <= 5.0 && weights[j] > 0.3;

    if (out.csv) {
        CsvTable t({"mode", "frequency_cm", "near_zero", "si_c_weight", "dmu_x_au", "dmu_y_au", "dmu_z_au"});
        for (std::size_t j = 0; j < nm.size(); ++j)
            t.add({static_cast<std::int64_t>(j), nm.frequencies[static_cast<Eigen::Index>(j)],
                   static_cast<std::int64_t>(nm.near_zero[j]), weights[j], nm.mode_dipole[j].x(),
                   nm.mode_dipole[j].y(), nm.mode_dipole[j].z()});
        t.write(out.dir / "normal_modes.csv", out.ref);
    }
    const bool ok = forces_ok && charge_ok && mode_ok;
    if (out.json)
        write_json(out.dir / "model_check.json", {{"max_force_relative_error", worst},
                                                  {"forces_ok", forces_ok},
                                                  {"total_charge", charge},
                                                  {"charge_ok", charge_ok},
                                                  {"target_mode_cm", target},
                                                  {"target_mode_ok", mode_ok},
                                                  {"passed", ok}});
    std::printf("forces %s (max rel err %.2e), charge %s (%.3f), %.0f cm^-1 mode %s\n", forces_ok ? "ok" : "FAIL",
                worst, charge_ok ? "ok" : "FAIL", charge, target, mode_ok ? "ok" : "FAIL");
    return ok ? exit_ok : exit_runtime;
}

} // namespace vscdyn::app
