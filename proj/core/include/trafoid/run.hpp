#pragma once

#include <exception>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "trafoid/config.hpp"
#include "trafoid/io.hpp"

namespace trafoid {

//! Process exit codes of the command-line tool.
enum ExitCode : int
{
  exit_ok = 0,
  exit_unexpected = 1,
  exit_config = 2,
  exit_identification = 3,
  exit_numerical = 4,
  exit_io = 5,
  exit_verification = 6
};

int exit_code_for(const std::exception& e);

struct RunResult
{
  int exit_code = exit_ok;
  ArtifactSet artifacts;
  std::vector<std::string> warnings;
  std::string summary;
};

//! Runs the pipeline of the config's mode and collects its artifacts in
//! memory. Pipeline errors propagate as exceptions.
RunResult execute(const RunConfig& config);

/*
 * Output directory: `output.dir` if set, otherwise
 * $TRAFOID_OUTPUT_ROOT/<mode>, otherwise ./trafoid-output/<mode>.
 */
std::filesystem::path output_directory(const RunConfig& config);

/*
 * execute + commit. Errors are reported on `log` and mapped to exit
 * codes; nothing is written for a failed run, except that a failing
 * verification still writes its report.
 */
int run(const RunConfig& config, std::ostream& log);

std::string version();

} // namespace trafoid
