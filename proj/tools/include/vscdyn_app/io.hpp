#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "vscdyn/dynamics.hpp"
#include "vscdyn_app/config.hpp"

namespace vscdyn::app {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t value);

/// Hash of the resolved config without its outputs block; every output
/// file refers to it.
std::string config_hash(const RunConfig& config);

/// Config hash, RNG identifier, unit table, version, and wall-clock time.
nlohmann::json make_manifest(const RunConfig& config, const std::string& command);

using Cell = std::variant<double, std::int64_t, std::string>;

/// CSV table: a "# manifest:" comment line, a header row with unit
/// suffixes, then rows. Doubles are written with 17 significant digits.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<Cell> row);
    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    void write(const std::filesystem::path& path, const std::string& manifest_ref) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

std::string format_double(double value);

void ensure_directory(const std::filesystem::path& dir);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

/// One row per frame: time (fs), positions (angstrom), velocities
/// (angstrom/fs), photon q and p (a.u.), energies (eV), dipole (e angstrom).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const ModelSystem& system, const std::string& manifest_ref);

/// Inverse of write_trajectory_csv, back to atomic units. The frame spacing
/// becomes dt with stride 1.
Trajectory read_trajectory_csv(const std::filesystem::path& path, const ModelSystem& system);

} // namespace vscdyn::app
