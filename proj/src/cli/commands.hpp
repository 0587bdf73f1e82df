#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cli/csv.hpp"
#include "cli/manifest.hpp"

namespace softadapt::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitMaxIters = 2,
  kExitDiverged = 3,
  kExitUsage = 64,
  kExitDataError = 65,
  kExitIoError = 74,
};

// Environment variable naming the directory for traces written without --out.
inline constexpr const char* kOutputDirEnv = "SOFTADAPT_OUTPUT_DIR";

// Runs the experiment a manifest describes, writes the trace to
// manifest.output and the manifest beside it. Returns the exit code.
int execute(const RunManifest& manifest, std::ostream& out, std::ostream& err);

struct Comparison {
  double tol = 0.0;
  long iters_a = 0;
  long iters_b = 0;
  double final_tloss_a = 0.0;
  double final_tloss_b = 0.0;
  // 1 - iters_a / iters_b
  double speedup = 0.0;
};

// Iteration (first column) of the first row whose tloss is below tol.
std::optional<long> iterations_to_tolerance(const CsvTable& trace, double tol);

// Throws std::invalid_argument when the traces are of different kinds or one
// of them never reaches the tolerance.
Comparison compare_traces(const CsvTable& a, const CsvTable& b, double tol);

// Entry point; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace softadapt::cli
