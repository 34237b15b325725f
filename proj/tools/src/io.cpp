#include "vscdyn_app/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vscdyn/error.hpp"
#include "vscdyn/rng.hpp"
#include "vscdyn/units.hpp"

#ifndef VSCDYN_VERSION
#define VSCDYN_VERSION "unknown"
#endif

namespace vscdyn::app {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string config_hash(const RunConfig& config) {
    // Where and in which formats results are written does not change them.
    auto j = config.to_json();
    j.erase("outputs");
    return hex64(fnv1a(j.dump()));
}

json make_manifest(const RunConfig& config, const std::string& command) {
    const auto now = std::chrono::system_clock::now();
    json m;
    m["command"] = command;
    m["version"] = VSCDYN_VERSION;
    m["config_hash"] = config_hash(config);
    m["config"] = config.to_json();
    m["rng"] = std::string(NormalRng::algorithm);
    m["units"] = {{"internal", "atomic units (Hartree, bohr, electron mass, hbar = 1)"},
                  {"hartree_to_wavenumber", units::hartree_to_wavenumber},
                  {"hartree_to_ev", units::hartree_to_ev},
                  {"amu_to_electron_mass", units::amu_to_electron_mass},
                  {"boltzmann_hartree_per_K", units::boltzmann},
                  {"fs_to_au_time", units::fs_to_au_time},
                  {"bohr_to_angstrom", units::bohr_to_angstrom}};
    m["created_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    return m;
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

std::string render(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell))
        return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&cell))
        return std::to_string(*i);
    return quote(std::get<std::string>(cell));
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                cur += '"';
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace

void CsvTable::add(std::vector<Cell> row) {
    if (row.size() != header_.size())
        throw ArgumentError("CSV row has " + std::to_string(row.size()) + " cells, header has " +
                            std::to_string(header_.size()));
    rows_.push_back(std::move(row));
}

void CsvTable::write(const fs::path& path, const std::string& manifest_ref) const {
    auto out = open_out(path);
    out << "# manifest: " << manifest_ref << "\n";
    for (std::size_t k = 0; k < header_.size(); ++k)
        out << (k ? "," : "") << quote(header_[k]);
    out << "\n";
    for (const auto& row : rows_) {
        for (std::size_t k = 0; k < row.size(); ++k)
            out << (k ? "," : "") << render(row[k]);
        out << "\n";
    }
    finish(out, path);
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create directory '" + dir.string() + "'");
}

void write_json(const fs::path& path, const json& value) {
    auto out = open_out(path);
    out << value.dump(2) << "\n";
    finish(out, path);
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

namespace {

constexpr double velocity_to_ang_fs = units::bohr_to_angstrom * units::fs_to_au_time;

std::vector<std::string> trajectory_header(const ModelSystem& system) {
    std::vector<std::string> h{"time_fs"};
    for (const char* prefix : {"", "v"})
        for (const auto& p : system.particles())
            for (const char* axis : {"x", "y", "z"})
                h.push_back(std::string(prefix) + axis + "_" + p.label + (*prefix ? "_A_per_fs" : "_A"));
    for (const char* s : {"photon_q_au", "photon_p_au", "E_pot_eV", "E_kin_eV", "E_cav_eV", "E_tot_eV",
                          "mu_x_eA", "mu_y_eA", "mu_z_eA"})
        h.emplace_back(s);
    return h;
}

} // namespace

void write_trajectory_csv(const fs::path& path, const Trajectory& trajectory, const ModelSystem& system,
                          const std::string& manifest_ref) {
    CsvTable table(trajectory_header(system));
    for (std::size_t f = 0; f < trajectory.frames(); ++f) {
        std::vector<Cell> row;
        row.reserve(table.header().size());
        row.emplace_back(units::au_to_fs(trajectory.times[f]));
        for (Eigen::Index k = 0; k < trajectory.positions[f].size(); ++k)
            row.emplace_back(units::bohr_to_ang(trajectory.positions[f][k]));
        for (Eigen::Index k = 0; k < trajectory.velocities[f].size(); ++k)
            row.emplace_back(trajectory.velocities[f][k] * velocity_to_ang_fs);
        const auto& e = trajectory.energies[f];
        row.emplace_back(trajectory.photon_q[f]);
        row.emplace_back(trajectory.photon_p[f]);
        for (double x : {e.potential, e.kinetic, e.cavity, e.total})
            row.emplace_back(units::hartree_to_eV(x));
        for (int a = 0; a < 3; ++a)
            row.emplace_back(units::bohr_to_ang(trajectory.dipoles[f][a]));
        table.add(std::move(row));
    }
    table.write(path, manifest_ref);
}

Trajectory read_trajectory_csv(const fs::path& path, const ModelSystem& system) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read trajectory '" + path.string() + "'");
    const auto expected = trajectory_header(system);
    std::string line;
    bool have_header = false;
    Trajectory t;
    const std::size_t n3 = system.dof();
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        const auto cells = split_csv_line(line);
        if (!have_header) {
            if (cells != expected)
                throw IoError("trajectory '" + path.string() + "' does not match the configured system");
            have_header = true;
            continue;
        }
        if (cells.size() != expected.size())
            throw IoError("short row in trajectory '" + path.string() + "'");
        std::vector<double> v(cells.size());
        try {
            for (std::size_t k = 0; k < cells.size(); ++k)
                v[k] = std::stod(cells[k]);
        } catch (const std::exception&) {
            throw IoError("non-numeric cell in trajectory '" + path.string() + "'");
        }
        std::size_t c = 0;
        t.times.push_back(units::fs_to_au(v[c++]));
        Vector x(static_cast<Eigen::Index>(n3)), u(static_cast<Eigen::Index>(n3));
        for (std::size_t k = 0; k < n3; ++k)
            x[static_cast<Eigen::Index>(k)] = units::ang_to_bohr(v[c++]);
        for (std::size_t k = 0; k < n3; ++k)
            u[static_cast<Eigen::Index>(k)] = v[c++] / velocity_to_ang_fs;
        t.positions.push_back(std::move(x));
        t.velocities.push_back(std::move(u));
        t.photon_q.push_back(v[c++]);
        t.photon_p.push_back(v[c++]);
        EnergyFrame e;
        e.potential = units::ev_to_hartree(v[c++]);
        e.kinetic = units::ev_to_hartree(v[c++]);
        e.cavity = units::ev_to_hartree(v[c++]);
        e.total = units::ev_to_hartree(v[c++]);
        t.energies.push_back(e);
        Vec3 mu;
        for (int a = 0; a < 3; ++a)
            mu[a] = units::ang_to_bohr(v[c++]);
        t.dipoles.push_back(mu);
    }
    if (!have_header || t.times.empty())
        throw IoError("trajectory '" + path.string() + "' has no frames");
    t.stride = 1;
    t.dt = t.times.size() > 1 ? t.times[1] - t.times[0] : 0.0;
    return t;
}

} // namespace vscdyn::app
