#pragma once

#include <string>

#include "vscdyn_app/config.hpp"

namespace vscdyn::app {

/// Exit codes shared by every command.
enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_runtime = 2, exit_io = 3 };

/// Each command writes its tables and a manifest.json into
/// config.outputs.directory. A command returns exit_runtime when it ran but a
/// check it performs did not pass; hard failures are thrown.
int cmd_spectrum(const RunConfig& config);
int cmd_run(const RunConfig& config);
int cmd_ensemble(const RunConfig& config, unsigned threads);
int cmd_scan(const RunConfig& config, unsigned threads);
int cmd_analyze(const RunConfig& config);
int cmd_calibrate(const RunConfig& config);
int cmd_model_check(const RunConfig& config);

/// Maps the library's exceptions onto exit codes.
int exit_code_for(const std::exception& e);

} // namespace vscdyn::app
