#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "magatom/scenario.hpp"

namespace magatom::cli {

inline constexpr const char* kSoftwareName = "magatom";
inline constexpr const char* kVersion = "1.0.0";

enum class Command { SimulateDirect, SimulateReduced, Compare, Ensemble, Fieldmap, Moment };

std::string to_string(Command c);
// Throws ValidationError for an unknown name.
Command parse_command(const std::string& name);
const std::vector<std::string>& command_names();

// Exit codes: 0 success, 1 validation error, 2 runtime or singularity error.
enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kRuntimeFailure = 2 };

// Maps the exception currently being handled to an exit code.
int exit_code_for_current_exception();

struct RunResult {
  int exit_code = kSuccess;
  std::string message;               // diagnostic on failure
  std::vector<std::string> outputs;  // artifacts written, manifest last
};

// Executes `command` and writes its artifacts under scenario.output.directory.
// Artifacts are staged and only renamed into place on success; a manifest
// (<prefix>-<command>-manifest.json) is written in every case. Never throws.
RunResult run(Command command, const Scenario& scenario, std::ostream& log);

// Deviation below which a uniform-field compare run passes, relative to |r(0)|.
inline constexpr double kUniformCompareThreshold = 1e-9;

}  // namespace magatom::cli
