#pragma once

#include <string>
#include <vector>

#include "wgf/config.hpp"
#include "wgf/matrix.hpp"

namespace wgf {

/// Executes the configured command and writes its artifacts into
/// config.out_dir. Returns the process exit code: 0 on success, 1 when a
/// verification check fails its tolerance.
int run(const RunConfig& config);

/// Comma-separated CSV with a header row; every value rendered at 17
/// significant digits so identical runs are byte-identical.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vector>& rows);

std::string format_real(double x);

/// Canonical evaluation start state: hanging pendulum, displaced scalar
/// state, alternating +-1 oscillator pattern at rest.
Vector evaluation_start(const EnvModel& env);

}  // namespace wgf
