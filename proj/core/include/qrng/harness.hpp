#pragma once

// Experiment configuration, execution backends, run manifests and evaluation.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/biasfit.hpp"
#include "qrng/bits.hpp"
#include "qrng/ent90b.hpp"
#include "qrng/families.hpp"
#include "qrng/remote.hpp"
#include "qrng/simnoise.hpp"
#include "qrng/sts22.hpp"

namespace qrng {

std::string_view tool_version();

/// Five-qubit star with the typical readout fidelity of 97% on every qubit.
CalibrationSnapshot default_calibration();

/// SHA-256 of the snapshot's canonical text, hex encoded.
std::string calibration_digest(const CalibrationSnapshot& calib);

struct NoiseOverrides {
  bool ideal_readout = false;  // drop the snapshot's confusion matrices
  std::optional<double> rx_angle_error;
  std::optional<double> ry_angle_error;
  std::optional<double> depolarizing_p;
};

struct BackendConfig {
  enum class Kind { local, remote };
  Kind kind = Kind::local;
  remote::Endpoint endpoint;
};

struct ExperimentConfig {
  bool paper_grid = false;
  std::vector<CircuitSpec> grid;            // used when paper_grid is false
  std::optional<std::size_t> shots;         // per spec; overrides `bits`
  std::size_t bits = 1'000'000;             // bits per stream when shots is unset
  std::uint64_t seed = 1;
  std::string calibration;                  // snapshot path; empty = default_calibration()
  NoiseOverrides noise;
  BackendConfig backend;
  std::filesystem::path out = "qrng-out";
  unsigned workers = 0;                     // concurrent executions; 0 = hardware threads

  /// {"grid": "paper-grid" | [spec, ...], "shots"?: n, "bits"?: n, "seed"?: n,
  ///  "calibration"?: path, "noise"?: {"ideal_readout", "rx_angle_error",
  ///  "ry_angle_error", "depolarizing_p"}, "backend"?: "local" | {"remote": url,
  ///  "timeout_s"?: s}, "out"?: dir, "workers"?: n}. Keys absent from the
  ///  document keep the values already in `base`.
  static ExperimentConfig parse(const nlohmann::json& doc, ExperimentConfig base);
  static ExperimentConfig parse(const nlohmann::json& doc);
  /// A relative "calibration" path is taken relative to the config file.
  static ExperimentConfig load(const std::filesystem::path& path, ExperimentConfig base);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Throws InvalidArgument on an unusable configuration.
  void validate(const Topology& topology) const;
  std::vector<CircuitSpec> specs(const Topology& topology) const;
};

/// Bits one shot contributes to the spec's extracted stream.
std::size_t bits_per_shot(const CircuitSpec& spec);
std::size_t shots_for(const ExperimentConfig& config, const CircuitSpec& spec);

/// Per-execution seed: specs sharing an execution key share a seed.
std::uint64_t spec_seed(std::uint64_t config_seed, const CircuitSpec& spec);

NoiseProfile noise_profile(const CalibrationSnapshot& calib, const NoiseOverrides& overrides);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual ShotTable execute(const Circuit& native, std::size_t shots, std::uint64_t seed) = 0;
};

class LocalBackend : public Backend {
 public:
  LocalBackend(NoiseProfile noise, RunOptions options = {}) : noise_(std::move(noise)), options_(options) {}
  ShotTable execute(const Circuit& native, std::size_t shots, std::uint64_t seed) override;

 private:
  NoiseProfile noise_;
  RunOptions options_;
};

class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(remote::Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  ShotTable execute(const Circuit& native, std::size_t shots, std::uint64_t seed) override;

 private:
  remote::Endpoint endpoint_;
};

struct ManifestEntry {
  std::string key;
  CircuitSpec spec;
  ExtractionPolicy policy = ExtractionPolicy::single_qubit;
  std::string file;  // relative to the manifest directory; empty on error
  std::size_t length = 0;
  std::size_t shots = 0;
  std::uint64_t seed = 0;
  std::optional<double> ones_fraction;
  std::string started, finished;      // ISO-8601 UTC
  std::vector<std::uint64_t> histogram;  // C3: outcome counts, bit j <-> spec.qubits[j]
  std::optional<std::string> error;
};

struct RunManifest {
  std::string tool_version;
  std::string calibration_digest;
  CalibrationSnapshot calibration;
  std::filesystem::path directory;  // not serialized
  std::vector<ManifestEntry> entries;

  bool ok() const;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc, std::filesystem::path directory);
  /// Accepts the manifest file or the directory containing manifest.json.
  static RunManifest load(const std::filesystem::path& path);
  /// Writes manifest.json in `directory` via a temporary file and rename.
  void save() const;
};

using ProgressFn = std::function<void(const ManifestEntry&)>;

/// Executes every spec, writes `<out>/streams/<key>.bin` plus sidecar and
/// `<out>/manifest.json`. Per-spec backend failures are recorded, not thrown.
RunManifest run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {},
                           std::shared_ptr<Backend> backend = nullptr);

struct EvaluateOptions {
  bool sts22 = true;
  bool ent90b = true;
  bool biasfit = true;
  sts22::Sts22Params params;
  biasfit::BiasOptions bias;
};

struct Evaluation {
  std::vector<std::pair<std::string, sts22::Sts22Report>> sts22;
  std::vector<std::pair<std::string, ent90b::EntropyReport>> ent90b;
  std::vector<std::pair<std::string, std::string>> skipped;  // key, reason
  std::optional<biasfit::FrequencySummary> frequency;
  std::optional<biasfit::C3Table> c3;
  std::vector<std::pair<std::string, double>> expected;  // key -> model ones fraction
};

/// Loads every successful entry (refusing length mismatches) and runs the selected analyses.
Evaluation evaluate(const RunManifest& manifest, const EvaluateOptions& options = {},
                    const ProgressFn& progress = {});

/// Writes reports and heatmap tables under `dir`; returns the files written.
std::vector<std::filesystem::path> write_evaluation(const Evaluation& eval, const std::filesystem::path& dir,
                                                    std::size_t n_qubits = 5);

}  // namespace qrng
