// qrng: generate QRNG bitstreams on the simulated device and evaluate them.
//
// Exit status: 0 success, 1 partial failure (some specs or subtests failed),
// 2 invalid configuration or arguments.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qrng/biasfit.hpp"
#include "qrng/error.hpp"
#include "qrng/harness.hpp"
#include "qrng/reports.hpp"

namespace {

using namespace qrng;

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kInvalid = 2;

struct SpecFlags {
  std::string family = "C1";
  std::string gate = "H";
  std::vector<QubitId> qubits{0};
  std::size_t repetitions = 0;
  std::optional<QubitId> stream_qubit;

  CircuitSpec spec() const {
    CircuitSpec s = CircuitSpec::make(parse_family(family), parse_gate_choice(gate), qubits);
    if (repetitions) s.repetitions = repetitions;
    s.stream_qubit = stream_qubit;
    return normalized(s);
  }
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f) {
  cmd->add_option("--family", f.family, "circuit family C1..C5")->capture_default_str();
  cmd->add_option("--gate", f.gate, "superposition gate: H, Rx or Ry")->capture_default_str();
  cmd->add_option("--qubits", f.qubits, "qubit ids")->delimiter(',')->expected(1, -1);
  cmd->add_option("--repetitions", f.repetitions, "C5 measurement rounds (default 2)");
  cmd->add_option("--stream-qubit", f.stream_qubit, "extract one qubit of a multi-qubit circuit");
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  out << doc.dump(2) << '\n';
}

int cmd_gen(const ExperimentConfig& config, bool quiet) {
  config.validate(Topology::spark());
  const auto total = config.specs(Topology::spark()).size();
  std::size_t done = 0;
  const auto manifest = run_experiment(config, [&](const ManifestEntry& e) {
    ++done;
    if (quiet) return;
    if (e.error) std::fprintf(stderr, "[%zu/%zu] %s FAILED: %s\n", done, total, e.key.c_str(), e.error->c_str());
    else std::fprintf(stderr, "[%zu/%zu] %s %zu bits, ones %.4f\n", done, total, e.key.c_str(), e.length, *e.ones_fraction);
  });
  std::cout << "manifest: " << (config.out / "manifest.json").string() << '\n';
  return manifest.ok() ? kOk : kPartial;
}

int cmd_test22(const std::string& file, std::size_t sequences, double alpha, const std::string& json_path) {
  const BitStream stream = load_stream(file);
  if (sequences == 0 || stream.size() / sequences < 100) {
    throw Error(Errc::invalid_argument, "need at least 100 bits per sequence");
  }
  if (sequences == 1) {
    const auto report = sts22::run_battery(stream);
    std::cout << sts22_text(report, alpha);
    if (!json_path.empty()) write_json(json_path, sts22::to_json(report));
    for (const auto& r : report.results)
      if (r.p_value && *r.p_value < alpha) return kPartial;
    return kOk;
  }
  const std::size_t len = stream.size() / sequences;
  std::vector<sts22::Sts22Report> reports;
  for (std::size_t i = 0; i < sequences; ++i) reports.push_back(sts22::run_battery(stream.slice(i * len, len)));
  const auto summary = sts22::summarize(reports, alpha);
  std::cout << sequences << " sequences of " << len << " bits\n" << sts22_summary_text(summary);
  if (!json_path.empty()) write_json(json_path, sts22::to_json(summary));
  for (const auto& s : summary)
    if (s.uniformity && (!s.proportion.pass || !s.uniformity->pass)) return kPartial;
  return kOk;
}

int cmd_test90b(const std::string& file, const std::string& json_path) {
  const auto report = ent90b::min_entropy(load_stream(file));
  if (report.below_recommended) std::cerr << "warning: fewer than " << ent90b::kRecommendedLength << " bits\n";
  std::cout << ent90b_text(report);
  if (!json_path.empty()) write_json(json_path, ent90b::to_json(report));
  return kOk;
}

int cmd_analyze(const std::string& run_dir, const std::string& out_dir, const EvaluateOptions& opts, bool quiet) {
  const auto manifest = RunManifest::load(run_dir);
  std::size_t done = 0;
  const auto eval = evaluate(manifest, opts, [&](const ManifestEntry& e) {
    if (!quiet) std::fprintf(stderr, "[%zu/%zu] %s\n", ++done, manifest.entries.size(), e.key.c_str());
  });
  const auto dir = out_dir.empty() ? manifest.directory / "reports" : std::filesystem::path(out_dir);
  for (const auto& f : write_evaluation(eval, dir)) std::cout << f.string() << '\n';
  return eval.skipped.empty() ? kOk : kPartial;
}

int cmd_report(const std::string& run_dir, const biasfit::BiasOptions& bias) {
  const auto manifest = RunManifest::load(run_dir);
  EvaluateOptions opts;
  opts.sts22 = false;
  opts.ent90b = false;
  opts.bias = bias;
  const auto eval = evaluate(manifest, opts);
  if (eval.frequency) std::cout << "Ones fraction (%) by qubit\n" << biasfit::to_text(*eval.frequency) << '\n';
  if (eval.c3) std::cout << "C3 ones fraction (%) and model fit\n" << biasfit::to_text(*eval.c3, 5) << '\n';
  std::cout << "Expected ones fraction (%)\n";
  for (const auto& [key, v] : eval.expected) std::printf("  %-20s %.2f\n", key.c_str(), v * 100.0);
  return eval.skipped.empty() ? kOk : kPartial;
}

int cmd_circuit(const SpecFlags& flags, bool native) {
  const Topology spark = Topology::spark();
  const Circuit c = build(flags.spec(), spark);
  std::cout << dump_circuit(native ? transpile(c, spark) : c);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QRNG bitstream generation and statistical evaluation"};
  app.set_version_flag("--version", std::string(qrng::tool_version()));
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress output");

  SpecFlags spec_flags;
  ExperimentConfig gen_config;
  std::string config_path, calib_path, backend = "local";
  bool paper_grid = false;
  std::size_t shots = 0;
  double depolarizing = -1.0;
  auto* gen = app.add_subcommand("gen", "generate bitstreams and a run manifest");
  add_spec_flags(gen, spec_flags);
  gen->add_flag("--paper-grid", paper_grid, "all 105 subvariants instead of a single spec");
  gen->add_option("--shots", shots, "shots per spec (default: enough for --bits)");
  gen->add_option("--bits", gen_config.bits, "bits per stream")->capture_default_str();
  gen->add_option("--seed", gen_config.seed, "base seed")->capture_default_str();
  gen->add_option("--calib", calib_path, "calibration snapshot JSON");
  gen->add_flag("--ideal-readout", gen_config.noise.ideal_readout, "ignore readout confusion");
  gen->add_option("--depolarizing", depolarizing, "per-gate depolarizing probability");
  gen->add_option("--backend", backend, "'local' or an http:// endpoint")->capture_default_str();
  gen->add_option("--out", gen_config.out, "output directory")->capture_default_str();
  gen->add_option("--workers", gen_config.workers, "concurrent executions (0 = all cores)");
  gen->add_option("--config", config_path, "experiment JSON; flags given explicitly take precedence");

  std::string stream_file, json_path;
  std::size_t sequences = 1;
  double alpha = 0.01;
  auto* t22 = app.add_subcommand("test22", "run the SP 800-22 battery on a stream file");
  t22->add_option("file", stream_file, ".bin with sidecar, or ASCII .txt")->required();
  t22->add_option("--sequences", sequences, "split into this many equal sequences")->capture_default_str();
  t22->add_option("--alpha", alpha, "significance level")->capture_default_str();
  t22->add_option("--json", json_path, "also write JSON here");

  auto* t90 = app.add_subcommand("test90b", "SP 800-90B non-IID min-entropy estimates");
  t90->add_option("file", stream_file, ".bin with sidecar, or ASCII .txt")->required();
  t90->add_option("--json", json_path, "also write JSON here");

  std::string run_dir, out_dir;
  EvaluateOptions eval_opts;
  bool no22 = false, no90 = false, nobias = false;
  auto* analyze = app.add_subcommand("analyze", "evaluate every stream of a run and write reports");
  analyze->add_option("run", run_dir, "run directory or manifest.json")->required();
  analyze->add_option("--out", out_dir, "report directory (default <run>/reports)");
  analyze->add_flag("--no-sts22", no22, "skip the SP 800-22 battery");
  analyze->add_flag("--no-90b", no90, "skip min-entropy estimation");
  analyze->add_flag("--no-bias", nobias, "skip the bias model tables");
  analyze->add_option("--c4c5-increment", eval_opts.bias.c4_c5_increment, "added to C4/C5 model predictions");

  biasfit::BiasOptions bias;
  auto* rep = app.add_subcommand("report", "print ones-fraction tables and model fits for a run");
  rep->add_option("run", run_dir, "run directory or manifest.json")->required();
  rep->add_option("--c4c5-increment", bias.c4_c5_increment, "added to C4/C5 model predictions");

  SpecFlags circuit_flags;
  bool native = false;
  auto* circ = app.add_subcommand("circuit", "print a circuit");
  add_spec_flags(circ, circuit_flags);
  circ->add_flag("--native", native, "after lowering to Rx/Ry/CZ");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*gen) {
      ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
      auto given = [&](const char* name) { return gen->count(name) > 0; };
      if (paper_grid) {
        config.paper_grid = true;
      } else if (config_path.empty() || given("--family") || given("--gate") || given("--qubits") ||
                 given("--repetitions") || given("--stream-qubit")) {
        config.paper_grid = false;
        config.grid = {spec_flags.spec()};
      }
      if (given("--shots")) config.shots = shots;
      if (given("--bits")) {
        config.bits = gen_config.bits;
        if (!given("--shots")) config.shots.reset();
      }
      if (given("--seed")) config.seed = gen_config.seed;
      if (given("--calib")) config.calibration = calib_path;
      if (given("--ideal-readout")) config.noise.ideal_readout = true;
      if (given("--depolarizing")) config.noise.depolarizing_p = depolarizing;
      if (given("--backend")) {
        config.backend = {};
        if (backend != "local") {
          config.backend.kind = BackendConfig::Kind::remote;
          config.backend.endpoint.url = backend;
        }
      }
      if (given("--out")) config.out = gen_config.out;
      if (given("--workers")) config.workers = gen_config.workers;
      return cmd_gen(config, quiet);
    }
    if (*t22) return cmd_test22(stream_file, sequences, alpha, json_path);
    if (*t90) return cmd_test90b(stream_file, json_path);
    if (*analyze) {
      eval_opts.sts22 = !no22;
      eval_opts.ent90b = !no90;
      eval_opts.biasfit = !nobias;
      return cmd_analyze(run_dir, out_dir, eval_opts, quiet);
    }
    if (*rep) return cmd_report(run_dir, bias);
    if (*circ) return cmd_circuit(circuit_flags, native);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case Errc::invalid_argument:
      case Errc::bad_format:
      case Errc::out_of_range:
      case Errc::not_connectable:
      case Errc::no_route:
      case Errc::no_hub:
      case Errc::policy_mismatch: return kInvalid;
      default: return kPartial;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPartial;
  }
  return kOk;
}
