#pragma once

#include <vector>

#include "vscdyn/ensemble.hpp"

namespace vscdyn {

/// Everything a scan row shares: the molecule, its starting geometry, the
/// paired sampling specs and propagation settings, and the cavity geometry.
struct ScanSetup {
    Vector positions;
    std::vector<SamplingSpec> specs;
    EnsembleParams params;
    Vec3 polarization = Vec3::UnitX();
    bool bilinear = true;
    bool self_polarization = true;
};

struct ScanRow {
    bool baseline = false;  // lambda = 0 reference, no cavity
    double omega_cm = 0.0;  // 0 for the baseline
    double ratio = 0.0;     // g0 / (hbar w_c)
    double lambda = 0.0;    // a.u.
    EnsembleAggregates aggregates;
};

/// Baseline row first, then one row per frequency at fixed g0 / (hbar w_c).
/// Every row reuses the same specs, so differences between rows come from the
/// cavity alone.
std::vector<ScanRow> resonance_scan(const ModelSystem& system, const ScanSetup& setup,
                                    const std::vector<double>& omega_list_cm, double fixed_ratio);

/// Baseline row first, then one row per ratio at a fixed frequency.
std::vector<ScanRow> coupling_scan(const ModelSystem& system, const ScanSetup& setup, double omega_cm,
                                   const std::vector<double>& ratio_list);

/// Runs one row; omega_cm <= 0 or ratio == 0 gives the cavity-free baseline.
ScanRow scan_row(const ModelSystem& system, const ScanSetup& setup, double omega_cm, double ratio);

} // namespace vscdyn
