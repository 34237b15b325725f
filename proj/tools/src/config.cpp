#include "vscdyn_app/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "vscdyn/error.hpp"
#include "vscdyn/units.hpp"

namespace vscdyn::app {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw ConfigError(what); }

void reject_unknown(const json& block, const std::string& name, const std::set<std::string>& allowed) {
    if (!block.is_object())
        invalid("'" + name + "' must be an object");
    for (const auto& [key, value] : block.items())
        if (!allowed.contains(key))
            invalid("unknown key '" + name + "." + key + "'");
}

double number(const json& block, const std::string& path, const std::string& key, double fallback) {
    if (!block.contains(key))
        return fallback;
    const json& v = block.at(key);
    if (!v.is_number())
        invalid("'" + path + "." + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        invalid("'" + path + "." + key + "' must be finite");
    return x;
}

double positive(const json& block, const std::string& path, const std::string& key, double fallback) {
    const double x = number(block, path, key, fallback);
    if (!(x > 0.0))
        invalid("'" + path + "." + key + "' must be positive");
    return x;
}

std::size_t count(const json& block, const std::string& path, const std::string& key, std::size_t fallback) {
    if (!block.contains(key))
        return fallback;
    const json& v = block.at(key);
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
        invalid("'" + path + "." + key + "' must be a positive integer");
    return v.get<std::size_t>();
}

bool flag(const json& block, const std::string& path, const std::string& key, bool fallback) {
    if (!block.contains(key))
        return fallback;
    if (!block.at(key).is_boolean())
        invalid("'" + path + "." + key + "' must be true or false");
    return block.at(key).get<bool>();
}

std::string text(const json& block, const std::string& path, const std::string& key, const std::string& fallback) {
    if (!block.contains(key))
        return fallback;
    if (!block.at(key).is_string())
        invalid("'" + path + "." + key + "' must be a string");
    return block.at(key).get<std::string>();
}

std::vector<double> numbers(const json& block, const std::string& path, const std::string& key,
                            std::vector<double> fallback) {
    if (!block.contains(key))
        return fallback;
    const json& v = block.at(key);
    if (!v.is_array())
        invalid("'" + path + "." + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number() || !std::isfinite(x.get<double>()))
            invalid("'" + path + "." + key + "' must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

// Scalar surrogate fields that a config may override.
const std::map<std::string, double SurrogateParameters::*>& surrogate_scalars() {
    static const std::map<std::string, double SurrogateParameters::*> fields{
        {"r_sif", &SurrogateParameters::r_sif},
        {"r_sime", &SurrogateParameters::r_sime},
        {"r_sic", &SurrogateParameters::r_sic},
        {"r_cc", &SurrogateParameters::r_cc},
        {"r_cph", &SurrogateParameters::r_cph},
        {"k_sif", &SurrogateParameters::k_sif},
        {"k_sime", &SurrogateParameters::k_sime},
        {"k_sic", &SurrogateParameters::k_sic},
        {"k_cc", &SurrogateParameters::k_cc},
        {"k_cph", &SurrogateParameters::k_cph},
        {"barrier_eV", &SurrogateParameters::barrier_eV},
        {"barrier_frequency_cm", &SurrogateParameters::barrier_frequency_cm},
        {"r_ts_offset", &SurrogateParameters::r_ts_offset},
        {"r_outer_offset", &SurrogateParameters::r_outer_offset},
        {"g3_sif_sic", &SurrogateParameters::g3_sif_sic},
        {"g3_sic_cc", &SurrogateParameters::g3_sic_cc},
        {"g3_sif_sime", &SurrogateParameters::g3_sif_sime},
        {"g3_cc_cph", &SurrogateParameters::g3_cc_cph},
        {"me_angle_deg", &SurrogateParameters::me_angle_deg},
        {"target_mode_cm", &SurrogateParameters::target_mode_cm},
    };
    return fields;
}

SystemConfig parse_system(const json& block) {
    reject_unknown(block, "system", {"builtin", "surrogate"});
    SystemConfig out;
    if (block.contains("builtin") == block.contains("surrogate"))
        invalid("'system' needs exactly one of 'builtin' or 'surrogate'");
    if (block.contains("builtin")) {
        if (text(block, "system", "builtin", "") != "pta_surrogate")
            invalid("'system.builtin' must be \"pta_surrogate\"");
        return out;
    }
    out.builtin = false;
    const json& s = block.at("surrogate");
    std::set<std::string> allowed{"charges", "masses_amu", "tune_target_mode", "tune_relaxed_barrier"};
    for (const auto& [key, ptr] : surrogate_scalars())
        allowed.insert(key);
    reject_unknown(s, "system.surrogate", allowed);
    for (const auto& [key, ptr] : surrogate_scalars())
        out.surrogate.*ptr = number(s, "system.surrogate", key, out.surrogate.*ptr);
    auto six = [&](const std::string& key, std::array<double, 6>& dst) {
        if (!s.contains(key))
            return;
        const auto v = numbers(s, "system.surrogate", key, {});
        if (v.size() != 6)
            invalid("'system.surrogate." + key + "' needs six entries");
        std::copy(v.begin(), v.end(), dst.begin());
    };
    six("charges", out.surrogate.charges);
    six("masses_amu", out.surrogate.masses_amu);
    for (double m : out.surrogate.masses_amu)
        if (!(m > 0.0))
            invalid("'system.surrogate.masses_amu' must be positive");
    out.surrogate.tune_target_mode = flag(s, "system.surrogate", "tune_target_mode", true);
    out.surrogate.tune_relaxed_barrier = flag(s, "system.surrogate", "tune_relaxed_barrier", true);
    return out;
}

CavityConfig parse_cavity(const json& block) {
    // resolved_lambda_au is written by to_json for readers; it is derived, so ignored here.
    reject_unknown(block, "cavity",
                   {"omega_c", "lambda_au", "ratio", "polarization", "bilinear", "self_polarization",
                    "resolved_lambda_au"});
    CavityConfig c;
    if (!block.contains("omega_c"))
        invalid("'cavity.omega_c' is required");
    c.omega_cm = positive(block, "cavity", "omega_c", 0.0);
    if (block.contains("lambda_au") && block.contains("ratio"))
        invalid("'cavity' takes either 'lambda_au' or 'ratio', not both");
    if (!block.contains("lambda_au") && !block.contains("ratio"))
        invalid("'cavity' needs one of 'lambda_au' or 'ratio'");
    if (block.contains("lambda_au"))
        c.lambda_au = number(block, "cavity", "lambda_au", 0.0);
    else
        c.ratio = number(block, "cavity", "ratio", 0.0);
    if (c.lambda_au.value_or(0.0) < 0.0 || c.ratio.value_or(0.0) < 0.0)
        invalid("cavity coupling must be non-negative");
    const auto pol = numbers(block, "cavity", "polarization", {1.0, 0.0, 0.0});
    if (pol.size() != 3)
        invalid("'cavity.polarization' needs three entries");
    const Vec3 e(pol[0], pol[1], pol[2]);
    if (!(e.norm() > 0.0))
        invalid("'cavity.polarization' must be non-zero");
    c.polarization = e.normalized();
    c.bilinear = flag(block, "cavity", "bilinear", true);
    c.self_polarization = flag(block, "cavity", "self_polarization", true);
    return c;
}

DynamicsConfig parse_dynamics(const json& block) {
    reject_unknown(block, "dynamics", {"dt_fs", "duration_fs", "stride"});
    DynamicsConfig d;
    d.dt_fs = positive(block, "dynamics", "dt_fs", d.dt_fs);
    d.duration_fs = positive(block, "dynamics", "duration_fs", d.duration_fs);
    d.stride = count(block, "dynamics", "stride", d.stride);
    if (d.duration_fs < d.dt_fs)
        invalid("'dynamics.duration_fs' must be at least one time step");
    return d;
}

EnsembleConfig parse_ensemble(const json& block) {
    reject_unknown(block, "ensemble",
                   {"temperature_K", "n_trajectories", "seed", "resample_T_K", "window_fs", "stretch_bohr", "aim",
                    "keep_trajectories"});
    EnsembleConfig e;
    e.temperature_K = number(block, "ensemble", "temperature_K", e.temperature_K);
    if (e.temperature_K < 0.0)
        invalid("'ensemble.temperature_K' must be non-negative");
    e.n_trajectories = count(block, "ensemble", "n_trajectories", e.n_trajectories);
    if (block.contains("seed")) {
        if (!block.at("seed").is_number_unsigned() && !(block.at("seed").is_number_integer() &&
                                                        block.at("seed").get<std::int64_t>() >= 0))
            invalid("'ensemble.seed' must be a non-negative integer");
        e.seed = block.at("seed").get<std::uint64_t>();
    }
    if (block.contains("resample_T_K") && !block.at("resample_T_K").is_null()) {
        e.resample_T_K = number(block, "ensemble", "resample_T_K", 0.0);
        if (*e.resample_T_K < 0.0)
            invalid("'ensemble.resample_T_K' must be non-negative");
    }
    const auto w = numbers(block, "ensemble", "window_fs", {e.window_start_fs, e.window_end_fs});
    if (w.size() != 2 || !(w[0] >= 0.0) || !(w[1] > w[0]))
        invalid("'ensemble.window_fs' must be [start, end] with 0 <= start < end");
    e.window_start_fs = w[0];
    e.window_end_fs = w[1];
    e.stretch_bohr = number(block, "ensemble", "stretch_bohr", e.stretch_bohr);
    if (block.contains("aim")) {
        const json& a = block.at("aim");
        reject_unknown(a, "ensemble.aim", {"projectile", "target"});
        e.aim_projectile = text(a, "ensemble.aim", "projectile", e.aim_projectile);
        e.aim_target = text(a, "ensemble.aim", "target", e.aim_target);
    }
    e.keep_trajectories = flag(block, "ensemble", "keep_trajectories", false);
    return e;
}

SpectrumConfig parse_spectrum(const json& block) {
    reject_unknown(block, "spectrum", {"broadening_cm", "lineshape", "lambda_list", "grid_cm"});
    SpectrumConfig s;
    s.broadening_cm = positive(block, "spectrum", "broadening_cm", s.broadening_cm);
    const std::string shape = text(block, "spectrum", "lineshape", "lorentzian");
    if (shape == "lorentzian")
        s.lineshape = Lineshape::lorentzian;
    else if (shape == "gaussian")
        s.lineshape = Lineshape::gaussian;
    else
        invalid("'spectrum.lineshape' must be \"lorentzian\" or \"gaussian\"");
    s.lambda_list = numbers(block, "spectrum", "lambda_list", s.lambda_list);
    for (double l : s.lambda_list)
        if (l < 0.0)
            invalid("'spectrum.lambda_list' entries must be non-negative");
    const auto g = numbers(block, "spectrum", "grid_cm", {s.grid_min_cm, s.grid_max_cm, s.grid_step_cm});
    if (g.size() != 3 || !(g[1] > g[0]) || !(g[2] > 0.0))
        invalid("'spectrum.grid_cm' must be [min, max, step] with max > min and step > 0");
    s.grid_min_cm = g[0];
    s.grid_max_cm = g[1];
    s.grid_step_cm = g[2];
    return s;
}

ScanConfig parse_scan(const json& block) {
    reject_unknown(block, "scan", {"omega_list_cm", "ratio", "ratio_list", "omega_fixed_cm"});
    ScanConfig s;
    s.omega_list_cm = numbers(block, "scan", "omega_list_cm", {});
    s.ratio = number(block, "scan", "ratio", s.ratio);
    s.ratio_list = numbers(block, "scan", "ratio_list", {});
    s.omega_fixed_cm = positive(block, "scan", "omega_fixed_cm", s.omega_fixed_cm);
    for (double w : s.omega_list_cm)
        if (!(w > 0.0))
            invalid("'scan.omega_list_cm' entries must be positive");
    for (double r : s.ratio_list)
        if (r < 0.0)
            invalid("'scan.ratio_list' entries must be non-negative");
    if (s.ratio < 0.0)
        invalid("'scan.ratio' must be non-negative");
    return s;
}

AnalyzeConfig parse_analyze(const json& block) {
    reject_unknown(block, "analyze", {"trajectories", "reference", "correlation_window"});
    AnalyzeConfig a;
    a.trajectories = text(block, "analyze", "trajectories", "");
    if (block.contains("reference"))
        a.reference = text(block, "analyze", "reference", "");
    a.correlation_window = count(block, "analyze", "correlation_window", a.correlation_window);
    if (a.correlation_window < 2)
        invalid("'analyze.correlation_window' must be at least 2");
    return a;
}

OutputConfig parse_outputs(const json& block) {
    reject_unknown(block, "outputs", {"directory", "formats"});
    OutputConfig o;
    o.directory = text(block, "outputs", "directory", o.directory);
    if (block.contains("formats")) {
        const json& f = block.at("formats");
        if (!f.is_array() || f.empty())
            invalid("'outputs.formats' must be a non-empty array");
        o.csv = o.json = false;
        for (const auto& x : f) {
            if (x == "csv")
                o.csv = true;
            else if (x == "json")
                o.json = true;
            else
                invalid("'outputs.formats' entries must be \"csv\" or \"json\"");
        }
    }
    return o;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, column = 1;
    for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

} // namespace

double CavityConfig::resolved_lambda() const {
    if (lambda_au)
        return *lambda_au;
    return lambda_for_ratio(ratio.value_or(0.0), units::wavenumber_to_hartree(omega_cm));
}

CavityMode CavityConfig::mode() const {
    return CavityMode(units::wavenumber_to_hartree(omega_cm), resolved_lambda(), polarization, bilinear,
                      self_polarization);
}

namespace {

// A null value means "not set", as in the resolved form written by to_json.
void drop_nulls(json& value) {
    if (!value.is_object())
        return;
    for (auto it = value.begin(); it != value.end();) {
        if (it->is_null()) {
            it = value.erase(it);
        } else {
            drop_nulls(*it);
            ++it;
        }
    }
}

} // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte);
        throw ConfigError("syntax error", line, column);
    }
    if (!doc.is_object())
        invalid("config must be a JSON object");
    drop_nulls(doc);
    reject_unknown(doc, "config",
                   {"system", "cavity", "dynamics", "ensemble", "spectrum", "scan", "analyze", "outputs"});
    if (!doc.contains("system"))
        invalid("missing required block 'system'");

    RunConfig c;
    c.system = parse_system(doc.at("system"));
    if (doc.contains("cavity"))
        c.cavity = parse_cavity(doc.at("cavity"));
    if (doc.contains("dynamics"))
        c.dynamics = parse_dynamics(doc.at("dynamics"));
    if (doc.contains("ensemble"))
        c.ensemble = parse_ensemble(doc.at("ensemble"));
    if (doc.contains("spectrum"))
        c.spectrum = parse_spectrum(doc.at("spectrum"));
    if (doc.contains("scan"))
        c.scan = parse_scan(doc.at("scan"));
    if (doc.contains("analyze"))
        c.analyze = parse_analyze(doc.at("analyze"));
    if (doc.contains("outputs"))
        c.outputs = parse_outputs(doc.at("outputs"));
    if (c.ensemble.window_end_fs > c.dynamics.duration_fs + 1e-9)
        invalid("'ensemble.window_fs' ends after 'dynamics.duration_fs'");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunConfig default_config() { return parse_config(R"({"system": {"builtin": "pta_surrogate"}})"); }

json RunConfig::to_json() const {
    json j;
    if (system.builtin) {
        j["system"] = {{"builtin", "pta_surrogate"}};
    } else {
        json s;
        for (const auto& [key, ptr] : surrogate_scalars())
            s[key] = system.surrogate.*ptr;
        s["charges"] = system.surrogate.charges;
        s["masses_amu"] = system.surrogate.masses_amu;
        s["tune_target_mode"] = system.surrogate.tune_target_mode;
        s["tune_relaxed_barrier"] = system.surrogate.tune_relaxed_barrier;
        j["system"] = {{"surrogate", s}};
    }
    if (cavity) {
        json c{{"omega_c", cavity->omega_cm},
               {"polarization", {cavity->polarization.x(), cavity->polarization.y(), cavity->polarization.z()}},
               {"bilinear", cavity->bilinear},
               {"self_polarization", cavity->self_polarization},
               {"resolved_lambda_au", cavity->resolved_lambda()}};
        if (cavity->lambda_au)
            c["lambda_au"] = *cavity->lambda_au;
        else
            c["ratio"] = *cavity->ratio;
        j["cavity"] = c;
    } else {
        j["cavity"] = nullptr;
    }
    j["dynamics"] = {{"dt_fs", dynamics.dt_fs}, {"duration_fs", dynamics.duration_fs}, {"stride", dynamics.stride}};
    j["ensemble"] = {{"temperature_K", ensemble.temperature_K},
                     {"n_trajectories", ensemble.n_trajectories},
                     {"seed", ensemble.seed},
                     {"resample_T_K", ensemble.resample_T_K ? json(*ensemble.resample_T_K) : json(nullptr)},
                     {"window_fs", {ensemble.window_start_fs, ensemble.window_end_fs}},
                     {"stretch_bohr", ensemble.stretch_bohr},
                     {"aim", {{"projectile", ensemble.aim_projectile}, {"target", ensemble.aim_target}}},
                     {"keep_trajectories", ensemble.keep_trajectories}};
    j["spectrum"] = {{"broadening_cm", spectrum.broadening_cm},
                     {"lineshape", spectrum.lineshape == Lineshape::lorentzian ? "lorentzian" : "gaussian"},
                     {"lambda_list", spectrum.lambda_list},
                     {"grid_cm", {spectrum.grid_min_cm, spectrum.grid_max_cm, spectrum.grid_step_cm}}};
    j["scan"] = {{"omega_list_cm", scan.omega_list_cm},
                 {"ratio", scan.ratio},
                 {"ratio_list", scan.ratio_list},
                 {"omega_fixed_cm", scan.omega_fixed_cm}};
    j["analyze"] = {{"trajectories", analyze.trajectories},
                    {"reference", analyze.reference ? json(*analyze.reference) : json(nullptr)},
                    {"correlation_window", analyze.correlation_window}};
    json formats = json::array();
    if (outputs.csv)
        formats.push_back("csv");
    if (outputs.json)
        formats.push_back("json");
    j["outputs"] = {{"directory", outputs.directory}, {"formats", formats}};
    return j;
}

PropagationParams propagation_params(const RunConfig& config) {
    PropagationParams p;
    p.dt = units::fs_to_au(config.dynamics.dt_fs);
    p.n_steps = static_cast<std::size_t>(std::llround(config.dynamics.duration_fs / config.dynamics.dt_fs));
    p.stride = config.dynamics.stride;
    return p;
}

TimeWindow analysis_window(const RunConfig& config) {
    return {units::fs_to_au(config.ensemble.window_start_fs), units::fs_to_au(config.ensemble.window_end_fs)};
}

ModelSystem build_system(const RunConfig& config) {
    if (config.system.builtin)
        return build_pta_surrogate();
    return build_surrogate(config.system.surrogate);
}

namespace {

std::size_t particle(const ModelSystem& system, const std::string& label) {
    const auto idx = system.find_particle(label);
    if (!idx)
        throw ConfigError("no particle labelled '" + label + "'");
    return *idx;
}

} // namespace

ScanSetup scan_setup(const RunConfig& config, const ModelSystem& system, unsigned threads) {
    const auto& e = config.ensemble;
    const std::size_t projectile = particle(system, e.aim_projectile);
    const std::size_t target = particle(system, e.aim_target);

    ScanSetup setup;
    setup.positions = approach_geometry(system.reference_positions(), projectile, target, e.stretch_bohr);
    for (std::size_t k = 0; k < e.n_trajectories; ++k) {
        SamplingSpec s;
        s.temperature = e.temperature_K;
        s.seed = e.seed;
        s.stream = k;
        s.aim = AimSpec{projectile, target};
        if (e.resample_T_K)
            s.resample = ResampleSpec{e.seed, *e.resample_T_K, 1};
        setup.specs.push_back(s);
    }
    setup.params.propagation = propagation_params(config);
    setup.params.monitor = default_reaction_monitor(system);
    setup.params.window = analysis_window(config);
    setup.params.threads = threads;
    setup.params.keep_trajectories = e.keep_trajectories;
    if (config.cavity) {
        setup.polarization = config.cavity->polarization;
        setup.bilinear = config.cavity->bilinear;
        setup.self_polarization = config.cavity->self_polarization;
    }
    return setup;
}

} // namespace vscdyn::app
