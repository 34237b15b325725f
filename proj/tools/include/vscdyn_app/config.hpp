#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vscdyn/analysis/scan.hpp"
#include "vscdyn/analysis/spectrum.hpp"
#include "vscdyn/surrogate.hpp"

namespace vscdyn::app {

struct SystemConfig {
    /// Overrides applied on top of the default surrogate parameters.
    SurrogateParameters surrogate;
    bool builtin = true;
};

struct CavityConfig {
    double omega_cm = 856.0;
    std::optional<double> lambda_au;
    std::optional<double> ratio;
    Vec3 polarization = Vec3::UnitX();
    bool bilinear = true;
    bool self_polarization = true;

    /// The lambda that the config resolves to, in a.u.
    double resolved_lambda() const;
    CavityMode mode() const;
};

struct DynamicsConfig {
    double dt_fs = 0.25;
    double duration_fs = 700.0;
    std::size_t stride = 4;
};

struct EnsembleConfig {
    double temperature_K = 300.0;
    std::size_t n_trajectories = 16;
    std::uint64_t seed = 1;
    std::optional<double> resample_T_K;
    double window_start_fs = 0.0;
    double window_end_fs = 700.0;
    /// Initial F-Si stretch away from the reference geometry, bohr.
    double stretch_bohr = 0.7;
    std::string aim_projectile = "F";
    std::string aim_target = "Si";
    bool keep_trajectories = false;
};

struct SpectrumConfig {
    double broadening_cm = 30.0;
    Lineshape lineshape = Lineshape::lorentzian;
    std::vector<double> lambda_list{0.0};
    double grid_min_cm = 0.0;
    double grid_max_cm = 2500.0;
    double grid_step_cm = 1.0;
};

struct ScanConfig {
    std::vector<double> omega_list_cm;
    double ratio = 1.132;
    std::vector<double> ratio_list;
    double omega_fixed_cm = 856.0;
};

struct AnalyzeConfig {
    std::string trajectories;           // directory with traj_*.csv
    std::optional<std::string> reference; // second directory for differences
    std::size_t correlation_window = 64; // frames
};

struct OutputConfig {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
};

struct RunConfig {
    SystemConfig system;
    std::optional<CavityConfig> cavity;
    DynamicsConfig dynamics;
    EnsembleConfig ensemble;
    SpectrumConfig spectrum;
    ScanConfig scan;
    AnalyzeConfig analyze;
    OutputConfig outputs;

    /// The fully resolved config, defaults included.
    nlohmann::json to_json() const;
};

/// Parses JSON text. Unknown keys, both lambda_au and ratio, a missing system
/// block, and out-of-range values raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Defaults with the builtin surrogate; what an empty {"system": {"builtin":
/// "pta_surrogate"}} resolves to.
RunConfig default_config();

/// Converts config units (fs, cm^-1, K) into the library's run settings.
PropagationParams propagation_params(const RunConfig& config);
TimeWindow analysis_window(const RunConfig& config);

ModelSystem build_system(const RunConfig& config);

/// Starting geometry, paired sampling specs, and propagation settings shared
/// by the ensemble and scan commands.
ScanSetup scan_setup(const RunConfig& config, const ModelSystem& system, unsigned threads);

} // namespace vscdyn::app
