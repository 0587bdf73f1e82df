#include "cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "softadapt/benchmarks.hpp"
#include "softadapt/finite_diff.hpp"

namespace softadapt::cli {

namespace {

const std::vector<std::string> kVariants = {"original", "normalized", "loss-weighted", "normalized-loss-weighted"};

std::string default_output(const std::string& file_name) {
  const char* dir = std::getenv(kOutputDirEnv);
  const std::filesystem::path base = (dir != nullptr && *dir != '\0') ? dir : ".";
  return (base / file_name).string();
}

bool write_file(const std::string& path, const std::string& contents, std::ostream& err) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << contents) || !f.flush()) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

bool write_outputs(const RunManifest& m, const std::string& trace_csv, std::ostream& err) {
  return write_file(m.output, trace_csv, err) && write_file(manifest_path_for(m.output), serialize_manifest(m), err);
}

int execute_bench(const RunManifest& m, const BenchRun& run, std::ostream& out, std::ostream& err) {
  const BenchmarkSpec spec = benchmark_by_name(run.benchmark);
  const Vector x0 = Eigen::Map<const Vector>(run.x0.data(), static_cast<Eigen::Index>(run.x0.size()));

  DescentTrace trace;
  int code = kExitOk;
  try {
    trace = descend(spec.problem, run.softadapt, run.step, x0, run.stop);
    code = trace.termination == Termination::kConverged ? kExitOk : kExitMaxIters;
  } catch (const DescentDiverged& e) {
    err << "error: " << e.what() << "\n";
    trace = e.trace();
    code = kExitDiverged;
  }

  std::ostringstream csv;
  write_bench_csv(csv, trace, spec.problem.dim, spec.problem.n_components);
  if (!write_outputs(m, csv.str(), err)) return kExitIoError;

  const char* status = code == kExitOk ? "converged" : code == kExitMaxIters ? "max-iters" : "diverged";
  out << run.benchmark << ": " << status << " after " << trace.iterations() << " iterations";
  if (!trace.records.empty()) out << ", tloss " << format_number(trace.records.back().true_loss);
  out << "\ntrace: " << m.output << "\n";
  return code;
}

int execute_sae(const RunManifest& m, const SaeRun& run, std::ostream& out, std::ostream& err) {
  sae::TrainConfig config = run.train;
  config.seed = m.seed;
  const sae::Dataset data = sae::generate_patterns(m.seed, run.patterns, run.dim, run.active);
  sae::TinyNet net = sae::TinyNet::initialize(run.dim, run.hidden, m.seed);

  sae::TrainTrace trace;
  int code = kExitOk;
  try {
    trace = sae::train(net, data, config);
  } catch (const sae::TrainingDiverged& e) {
    err << "error: " << e.what() << "\n";
    trace = e.trace();
    code = kExitDiverged;
  }

  std::ostringstream csv;
  write_sae_csv(csv, trace);
  if (!write_outputs(m, csv.str(), err)) return kExitIoError;

  out << "sae: " << trace.epochs.size() << " epochs";
  if (!trace.epochs.empty()) out << ", final tloss " << format_number(trace.epochs.back().true_loss);
  out << "\ntrace: " << m.output << "\n";
  return code;
}

void add_softadapt_options(CLI::App* cmd, std::string& variant, SoftAdaptConfig& sa, int& fd_order) {
  cmd->add_option("--variant", variant, "SoftAdapt variant")->check(CLI::IsMember(kVariants))->capture_default_str();
  cmd->add_option("--beta", sa.beta, "Softmax temperature")->capture_default_str();
  cmd->add_option("--epsilon", sa.epsilon, "Stabilizing constant")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--history-len", sa.history_len, "Losses kept per component")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  cmd->add_option("--fd-order", fd_order, "Finite-difference order (default min(history-len - 1, 5))")
      ->check(CLI::Range(kMinFiniteDiffOrder, kMaxFiniteDiffOrder));
  cmd->add_flag("--wait-full-history", sa.wait_for_full_history, "Hold equal weights until the history is full");
}

// Fills variant and the default finite-difference order into sa.
void resolve_softadapt(const std::string& variant, int fd_order, SoftAdaptConfig& sa) {
  apply_variant(variant, sa);
  sa.fd_order = fd_order > 0 ? fd_order : std::min(sa.history_len - 1, kMaxFiniteDiffOrder);
  sa.validate();
}

int run_compare(const std::string& path_a, const std::string& path_b, std::optional<double> tol_flag,
                std::string out_path, std::ostream& out, std::ostream& err) {
  const CsvTable a = read_csv(path_a);
  const CsvTable b = read_csv(path_b);

  std::optional<double> tol = tol_flag;
  std::vector<double> manifest_tols;
  for (const std::string& p : {path_a, path_b}) {
    const std::string mp = manifest_path_for(p);
    if (!std::filesystem::exists(mp)) continue;
    const RunManifest m = read_manifest(mp);
    if (const auto* bench = std::get_if<BenchRun>(&m.config)) manifest_tols.push_back(bench->stop.tol);
  }
  if (manifest_tols.size() == 2 && manifest_tols[0] != manifest_tols[1]) {
    throw std::invalid_argument("traces were run with different tolerances (" + format_number(manifest_tols[0]) +
                                " vs " + format_number(manifest_tols[1]) + ")");
  }
  if (!tol && !manifest_tols.empty()) tol = manifest_tols.front();
  if (!tol) {
    err << "error: no tolerance in the trace manifests; pass --tol\n";
    return kExitUsage;
  }

  const Comparison c = compare_traces(a, b, *tol);
  const nlohmann::json record = {{"trace_a", path_a},
                                 {"trace_b", path_b},
                                 {"tol", c.tol},
                                 {"iters_a", c.iters_a},
                                 {"iters_b", c.iters_b},
                                 {"final_tloss_a", c.final_tloss_a},
                                 {"final_tloss_b", c.final_tloss_b},
                                 {"speedup", c.speedup}};
  out << "iterations to tolerance " << format_number(c.tol) << ": " << c.iters_a << " vs " << c.iters_b << "\n"
      << "final tloss: " << format_number(c.final_tloss_a) << " vs " << format_number(c.final_tloss_b) << "\n"
      << "speedup: " << format_number(c.speedup) << "\n";
  if (out_path.empty()) out_path = default_output("compare.json");
  if (!write_file(out_path, record.dump(2) + "\n", err)) return kExitIoError;
  return kExitOk;
}

}  // namespace

int execute(const RunManifest& m, std::ostream& out, std::ostream& err) {
  if (const auto* bench = std::get_if<BenchRun>(&m.config)) return execute_bench(m, *bench, out, err);
  return execute_sae(m, std::get<SaeRun>(m.config), out, err);
}

std::optional<long> iterations_to_tolerance(const CsvTable& trace, double tol) {
  const std::size_t tcol = trace.column("tloss");
  for (const auto& row : trace.rows) {
    if (row[tcol] < tol) return static_cast<long>(row[0]);
  }
  return std::nullopt;
}

Comparison compare_traces(const CsvTable& a, const CsvTable& b, double tol) {
  if (a.header.empty() || b.header.empty() || a.header.front() != b.header.front()) {
    throw std::invalid_argument("traces are of different kinds");
  }
  if (a.rows.empty() || b.rows.empty()) throw std::invalid_argument("trace has no rows");
  const auto ia = iterations_to_tolerance(a, tol);
  const auto ib = iterations_to_tolerance(b, tol);
  if (!ia || !ib) {
    throw std::invalid_argument(std::string("trace ") + (!ia ? "A" : "B") + " never reaches tolerance " +
                                format_number(tol));
  }
  Comparison c;
  c.tol = tol;
  c.iters_a = *ia;
  c.iters_b = *ib;
  c.final_tloss_a = a.rows.back()[a.column("tloss")];
  c.final_tloss_b = b.rows.back()[b.column("tloss")];
  if (c.iters_b == 0) {
    if (c.iters_a != 0) throw std::invalid_argument("baseline trace starts converged; speedup is undefined");
    c.speedup = 0.0;
  } else {
    c.speedup = 1.0 - static_cast<double>(c.iters_a) / static_cast<double>(c.iters_b);
  }
  return c;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SoftAdapt adaptive loss weighting experiments"};
  app.require_subcommand(1);

  // bench
  CLI::App* bench = app.add_subcommand("bench", "Weighted gradient descent on a 2-D benchmark");
  BenchRun b;
  std::string b_variant = "original";
  int b_fd_order = 0;
  std::string b_step = "fixed";
  std::string b_bb_variant = "long";
  std::string b_criterion = "loss";
  std::vector<double> b_x0;
  std::uint64_t b_seed = 0;
  std::string b_out;
  bench->add_option("benchmark", b.benchmark, "rosenbrock or beale")->required();
  add_softadapt_options(bench, b_variant, b.softadapt, b_fd_order);
  bench->add_option("--step", b_step, "Step-size rule")->check(CLI::IsMember({"fixed", "bb"}))->capture_default_str();
  bench->add_option("--bb-variant", b_bb_variant, "Barzilai-Borwein formula")
      ->check(CLI::IsMember({"long", "short"}))
      ->capture_default_str();
  bench->add_option("--eta", b.step.eta, "Fixed step size")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--eta-min", b.step.eta_min, "Smallest adaptive step")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--eta-max", b.step.eta_max, "Largest adaptive step")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--x0", b_x0, "Starting point, comma separated (default: benchmark's own)")->delimiter(',');
  bench->add_option("--max-iters", b.stop.max_iters, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--tol", b.stop.tol, "Convergence tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--stop", b_criterion, "Stop on true loss or gradient norm")
      ->check(CLI::IsMember({"loss", "grad-norm"}))
      ->capture_default_str();
  bench->add_option("--seed", b_seed, "Recorded in the manifest")->capture_default_str();
  bench->add_option("--out", b_out, "Trace path (default $SOFTADAPT_OUTPUT_DIR/bench_<name>.csv)");

  // sae
  CLI::App* sae_cmd = app.add_subcommand("sae", "Sparse autoencoder on synthetic patterns");
  SaeRun s;
  std::string s_mode = "softadapt";
  std::string s_variant = "loss-weighted";
  int s_fd_order = 0;
  std::uint64_t s_seed = 7;
  std::string s_out;
  sae_cmd->add_option("--mode", s_mode, "softadapt or fixed")->check(CLI::IsMember({"softadapt", "fixed"}))->capture_default_str();
  sae_cmd->add_option("--lambda", s.train.lambda, "Fixed sparsity weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  add_softadapt_options(sae_cmd, s_variant, s.train.softadapt, s_fd_order);
  sae_cmd->add_option("--epochs", s.train.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  sae_cmd->add_option("--batch-size", s.train.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  sae_cmd->add_option("--lr", s.train.learning_rate, "Step size")->check(CLI::PositiveNumber)->capture_default_str();
  sae_cmd->add_option("--seed", s_seed, "Seed for data, initialization and shuffling")->capture_default_str();
  sae_cmd->add_option("--patterns", s.patterns, "Dataset size")->check(CLI::PositiveNumber)->capture_default_str();
  sae_cmd->add_option("--dim", s.dim, "Input dimension")->check(CLI::PositiveNumber)->capture_default_str();
  sae_cmd->add_option("--hidden", s.hidden, "Hidden units")->check(CLI::PositiveNumber)->capture_default_str();
  sae_cmd->add_option("--active", s.active, "Ones per pattern")->check(CLI::PositiveNumber)->capture_default_str();
  sae_cmd->add_option("--out", s_out, "Trace path (default $SOFTADAPT_OUTPUT_DIR/sae_<mode>.csv)");

  // compare
  CLI::App* compare = app.add_subcommand("compare", "Iterations-to-tolerance comparison of two traces");
  std::string c_a;
  std::string c_b;
  std::optional<double> c_tol;
  std::string c_out;
  compare->add_option("trace_a", c_a, "Candidate trace")->required()->check(CLI::ExistingFile);
  compare->add_option("trace_b", c_b, "Baseline trace")->required()->check(CLI::ExistingFile);
  compare->add_option("--tol", c_tol, "Tolerance on tloss (default: from the manifests)")->check(CLI::PositiveNumber);
  compare->add_option("--out", c_out, "Comparison record path (default $SOFTADAPT_OUTPUT_DIR/compare.json)");

  // replay
  CLI::App* replay = app.add_subcommand("replay", "Re-run the experiment recorded in a manifest");
  std::string r_manifest;
  std::string r_out;
  replay->add_option("manifest", r_manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", r_out, "Override the trace path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (bench->parsed()) {
      resolve_softadapt(b_variant, b_fd_order, b.softadapt);
      const BenchmarkSpec spec = benchmark_by_name(b.benchmark);
      b.step.kind = b_step == "bb" ? StepRule::Kind::kBarzilaiBorwein : StepRule::Kind::kFixed;
      b.step.bb_variant = b_bb_variant == "long" ? StepRule::BbVariant::kLong : StepRule::BbVariant::kShort;
      b.stop.criterion = b_criterion == "loss" ? StopRule::Criterion::kTrueLoss : StopRule::Criterion::kGradientNorm;
      b.step.validate();
      if (b_x0.empty()) b_x0.assign(spec.default_x0.data(), spec.default_x0.data() + spec.default_x0.size());
      if (b_x0.size() != spec.problem.dim) {
        throw std::invalid_argument("--x0 needs " + std::to_string(spec.problem.dim) + " coordinates");
      }
      b.x0 = b_x0;
      RunManifest m{b, b_seed, b_out.empty() ? default_output("bench_" + b.benchmark + ".csv") : b_out};
      return execute(m, out, err);
    }
    if (sae_cmd->parsed()) {
      resolve_softadapt(s_variant, s_fd_order, s.train.softadapt);
      s.train.mode = s_mode == "softadapt" ? sae::TrainConfig::Mode::kSoftAdapt : sae::TrainConfig::Mode::kFixedLambda;
      s.train.seed = s_seed;
      if (s.active > s.dim) throw std::invalid_argument("--active cannot exceed --dim");
      s.train.validate();
      RunManifest m{s, s_seed, s_out.empty() ? default_output("sae_" + s_mode + ".csv") : s_out};
      return execute(m, out, err);
    }
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (compare->parsed()) return run_compare(c_a, c_b, c_tol, c_out, out, err);
    if (replay->parsed()) {
      RunManifest m = read_manifest(r_manifest);
      if (!r_out.empty()) m.output = r_out;
      return execute(m, out, err);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace softadapt::cli
