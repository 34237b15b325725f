#include "vscdyn/analysis/scan.hpp"

#include "vscdyn/error.hpp"
#include "vscdyn/units.hpp"

namespace vscdyn {

ScanRow scan_row(const ModelSystem& system, const ScanSetup& setup, double omega_cm, double ratio) {
    if (ratio < 0.0)
        throw ArgumentError("coupling ratio must be non-negative");
    ScanRow row;
    row.omega_cm = omega_cm;
    row.ratio = ratio;
    if (omega_cm <= 0.0) {
        row.baseline = true;
        row.omega_cm = 0.0;
        row.ratio = 0.0;
        row.aggregates = run_ensemble(system, nullptr, setup.positions, setup.specs, setup.params).aggregates;
        return row;
    }
    const double omega = units::wavenumber_to_hartree(omega_cm);
    row.lambda = lambda_for_ratio(ratio, omega);
    const CavityMode mode(omega, row.lambda, setup.polarization, setup.bilinear, setup.self_polarization);
    row.aggregates = run_ensemble(system, &mode, setup.positions, setup.specs, setup.params).aggregates;
    return row;
}

std::vector<ScanRow> resonance_scan(const ModelSystem& system, const ScanSetup& setup,
                                    const std::vector<double>& omega_list_cm, double fixed_ratio) {
    if (omega_list_cm.empty())
        throw ArgumentError("frequency list is empty");
    for (double w : omega_list_cm)
        if (!(w > 0.0))
            throw ArgumentError("cavity frequencies must be positive");
    std::vector<ScanRow> rows;
    rows.push_back(scan_row(system, setup, 0.0, 0.0));
    for (double w : omega_list_cm)
        rows.push_back(scan_row(system, setup, w, fixed_ratio));
    return rows;
}

std::vector<ScanRow> coupling_scan(const ModelSystem& system, const ScanSetup& setup, double omega_cm,
                                   const std::vector<double>& ratio_list) {
    if (ratio_list.empty())
        throw ArgumentError("ratio list is empty");
    if (!(omega_cm > 0.0))
        throw ArgumentError("cavity frequency must be positive");
    std::vector<ScanRow> rows;
    rows.push_back(scan_row(system, setup, 0.0, 0.0));
    for (double r : ratio_list)
        rows.push_back(scan_row(system, setup, omega_cm, r));
    return rows;
}

} // namespace vscdyn
