#include "cli/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace softadapt::cli {

using nlohmann::json;

namespace {

json softadapt_to_json(const SoftAdaptConfig& c) {
  return {{"variant", variant_name(c)},         {"beta", c.beta},
          {"epsilon", c.epsilon},               {"history_len", c.history_len},
          {"fd_order", c.fd_order},             {"wait_for_full_history", c.wait_for_full_history}};
}

SoftAdaptConfig softadapt_from_json(const json& j) {
  SoftAdaptConfig c;
  apply_variant(j.at("variant").get<std::string>(), c);
  c.beta = j.at("beta").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.history_len = j.at("history_len").get<int>();
  c.fd_order = j.at("fd_order").get<int>();
  c.wait_for_full_history = j.at("wait_for_full_history").get<bool>();
  return c;
}

json bench_to_json(const BenchRun& b) {
  const bool bb = b.step.kind == StepRule::Kind::kBarzilaiBorwein;
  return {
      {"benchmark", b.benchmark},
      {"softadapt", softadapt_to_json(b.softadapt)},
      {"step",
       {{"kind", bb ? "bb" : "fixed"},
        {"eta", b.step.eta},
        {"eta_min", b.step.eta_min},
        {"eta_max", b.step.eta_max},
        {"bb_variant", b.step.bb_variant == StepRule::BbVariant::kLong ? "long" : "short"}}},
      {"x0", b.x0},
      {"stop",
       {{"max_iters", b.stop.max_iters},
        {"tol", b.stop.tol},
        {"criterion", b.stop.criterion == StopRule::Criterion::kTrueLoss ? "loss" : "grad-norm"}}},
  };
}

BenchRun bench_from_json(const json& j) {
  BenchRun b;
  b.benchmark = j.at("benchmark").get<std::string>();
  b.softadapt = softadapt_from_json(j.at("softadapt"));
  const json& s = j.at("step");
  const std::string kind = s.at("kind").get<std::string>();
  if (kind != "fixed" && kind != "bb") throw std::invalid_argument("unknown step kind '" + kind + "'");
  b.step.kind = kind == "bb" ? StepRule::Kind::kBarzilaiBorwein : StepRule::Kind::kFixed;
  b.step.eta = s.at("eta").get<double>();
  b.step.eta_min = s.at("eta_min").get<double>();
  b.step.eta_max = s.at("eta_max").get<double>();
  const std::string bbv = s.at("bb_variant").get<std::string>();
  if (bbv != "long" && bbv != "short") throw std::invalid_argument("unknown bb_variant '" + bbv + "'");
  b.step.bb_variant = bbv == "long" ? StepRule::BbVariant::kLong : StepRule::BbVariant::kShort;
  b.x0 = j.at("x0").get<std::vector<double>>();
  const json& st = j.at("stop");
  b.stop.max_iters = st.at("max_iters").get<long>();
  b.stop.tol = st.at("tol").get<double>();
  const std::string crit = st.at("criterion").get<std::string>();
  if (crit != "loss" && crit != "grad-norm") throw std::invalid_argument("unknown stop criterion '" + crit + "'");
  b.stop.criterion = crit == "loss" ? StopRule::Criterion::kTrueLoss : StopRule::Criterion::kGradientNorm;
  return b;
}

json sae_to_json(const SaeRun& s) {
  const sae::TrainConfig& t = s.train;
  return {{"mode", t.mode == sae::TrainConfig::Mode::kSoftAdapt ? "softadapt" : "fixed"},
          {"lambda", t.lambda},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"softadapt", softadapt_to_json(t.softadapt)},
          {"patterns", s.patterns},
          {"dim", s.dim},
          {"hidden", s.hidden},
          {"active", s.active}};
}

SaeRun sae_from_json(const json& j) {
  SaeRun s;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode != "softadapt" && mode != "fixed") throw std::invalid_argument("unknown sae mode '" + mode + "'");
  s.train.mode = mode == "softadapt" ? sae::TrainConfig::Mode::kSoftAdapt : sae::TrainConfig::Mode::kFixedLambda;
  s.train.lambda = j.at("lambda").get<double>();
  s.train.epochs = j.at("epochs").get<int>();
  s.train.batch_size = j.at("batch_size").get<int>();
  s.train.learning_rate = j.at("learning_rate").get<double>();
  s.train.softadapt = softadapt_from_json(j.at("softadapt"));
  s.patterns = j.at("patterns").get<int>();
  s.dim = j.at("dim").get<int>();
  s.hidden = j.at("hidden").get<int>();
  s.active = j.at("active").get<int>();
  return s;
}

}  // namespace

std::string variant_name(const SoftAdaptConfig& c) {
  if (c.normalized && c.loss_weighted) return "normalized-loss-weighted";
  if (c.normalized) return "normalized";
  if (c.loss_weighted) return "loss-weighted";
  return "original";
}

void apply_variant(std::string_view name, SoftAdaptConfig& c) {
  if (name == "original") {
    c.normalized = false;
    c.loss_weighted = false;
  } else if (name == "normalized") {
    c.normalized = true;
    c.loss_weighted = false;
  } else if (name == "loss-weighted") {
    c.normalized = false;
    c.loss_weighted = true;
  } else if (name == "normalized-loss-weighted") {
    c.normalized = true;
    c.loss_weighted = true;
  } else {
    throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
  }
}

std::string serialize_manifest(const RunManifest& m) {
  json j;
  j["artifact_version"] = m.artifact_version;
  j["subcommand"] = m.subcommand();
  j["seed"] = m.seed;
  j["output"] = m.output;
  j["config"] = std::holds_alternative<BenchRun>(m.config) ? bench_to_json(std::get<BenchRun>(m.config))
                                                           : sae_to_json(std::get<SaeRun>(m.config));
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.artifact_version = j.at("artifact_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.output = j.at("output").get<std::string>();
    const std::string sub = j.at("subcommand").get<std::string>();
    if (sub == "bench") {
      m.config = bench_from_json(j.at("config"));
    } else if (sub == "sae") {
      SaeRun s = sae_from_json(j.at("config"));
      s.train.seed = m.seed;
      m.config = std::move(s);
    } else {
      throw std::invalid_argument("unknown subcommand '" + sub + "'");
    }
    return m;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed manifest: ") + e.what());
  }
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open manifest '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string manifest_path_for(const std::string& trace_path) {
  return std::filesystem::path(trace_path).replace_extension(".manifest.json").string();
}

}  // namespace softadapt::cli
