#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "softadapt/optimize.hpp"
#include "softadapt/sae.hpp"
#include "softadapt/softadapt.hpp"

namespace softadapt::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct BenchRun {
  std::string benchmark = "rosenbrock";
  SoftAdaptConfig softadapt;
  StepRule step;
  std::vector<double> x0;
  StopRule stop;
};

struct SaeRun {
  sae::TrainConfig train;
  int patterns = 256;
  int dim = 64;
  int hidden = 16;
  int active = 4;
};

// Everything needed to repeat a run: the resolved configuration with all
// defaults filled in, the seed and where the trace went.
struct RunManifest {
  std::variant<BenchRun, SaeRun> config;
  std::uint64_t seed = 0;
  std::string output;
  std::string artifact_version = kArtifactVersion;

  std::string subcommand() const { return std::holds_alternative<BenchRun>(config) ? "bench" : "sae"; }
};

// "original", "normalized", "loss-weighted" or "normalized-loss-weighted".
std::string variant_name(const SoftAdaptConfig& config);
// Throws std::invalid_argument for unknown names.
void apply_variant(std::string_view name, SoftAdaptConfig& config);

std::string serialize_manifest(const RunManifest& manifest);
// Throws std::invalid_argument on malformed or incomplete manifests.
RunManifest parse_manifest(std::string_view text);

RunManifest read_manifest(const std::string& path);
// trace.csv -> trace.manifest.json
std::string manifest_path_for(const std::string& trace_path);

}  // namespace softadapt::cli
