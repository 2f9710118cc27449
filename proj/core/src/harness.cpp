#include "qrng/harness.hpp"

#include <atomic>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <sodium.h>

#include "qrng/error.hpp"
#include "qrng/json_io.hpp"
#include "qrng/reports.hpp"
#include "qrng/rng.hpp"

#ifndef QRNG_VERSION
#define QRNG_VERSION "0.0.0"
#endif

namespace qrng {

namespace {

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
}

ExtractionPolicy policy_for(const CircuitSpec& spec) { return default_policy(spec); }

}  // namespace

std::string_view tool_version() { return QRNG_VERSION; }

CalibrationSnapshot default_calibration() {
  QubitCalibration q;
  q.p01 = 0.03;
  q.p10 = 0.03;
  q.f_1q = 0.999;
  q.f_2q = 0.99;
  q.t1_ms = 0.964;
  q.t2_ms = 1.155;
  return CalibrationSnapshot(std::vector<QubitCalibration>(5, q));
}

std::string calibration_digest(const CalibrationSnapshot& calib) {
  if (sodium_init() < 0) throw Error(Errc::io, "libsodium failed to initialize");
  const std::string text = calib.to_text();
  unsigned char hash[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(hash, reinterpret_cast<const unsigned char*>(text.data()), text.size());
  char hex[crypto_hash_sha256_BYTES * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, hash, sizeof hash);
  return hex;
}

ExperimentConfig ExperimentConfig::parse(const nlohmann::json& doc, ExperimentConfig c) {
  auto bad = [](const std::string& what) { return Error(Errc::invalid_argument, "config: " + what); };
  if (!doc.is_object()) throw bad("document must be an object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "grid") {
        if (value.is_string()) {
          if (value.get<std::string>() != "paper-grid") throw bad("unknown grid keyword '" + value.get<std::string>() + "'");
          c.paper_grid = true;
          c.grid.clear();
        } else {
          c.paper_grid = false;
          c.grid = value.get<std::vector<CircuitSpec>>();
        }
      } else if (key == "shots") {
        c.shots = value.get<std::size_t>();
      } else if (key == "bits") {
        c.bits = value.get<std::size_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "calibration") {
        c.calibration = value.get<std::string>();
      } else if (key == "noise") {
        if (value.contains("ideal_readout")) c.noise.ideal_readout = value["ideal_readout"].get<bool>();
        if (value.contains("rx_angle_error")) c.noise.rx_angle_error = value["rx_angle_error"].get<double>();
        if (value.contains("ry_angle_error")) c.noise.ry_angle_error = value["ry_angle_error"].get<double>();
        if (value.contains("depolarizing_p")) c.noise.depolarizing_p = value["depolarizing_p"].get<double>();
      } else if (key == "backend") {
        if (value.is_string()) {
          if (value.get<std::string>() != "local") throw bad("backend must be \"local\" or {\"remote\": url}");
          c.backend.kind = BackendConfig::Kind::local;
        } else {
          c.backend.kind = BackendConfig::Kind::remote;
          c.backend.endpoint.url = value.at("remote").get<std::string>();
          if (value.contains("timeout_s")) c.backend.endpoint.timeout = std::chrono::seconds(value["timeout_s"].get<int>());
        }
      } else if (key == "out") {
        c.out = value.get<std::string>();
      } else if (key == "workers") {
        c.workers = value.get<unsigned>();
      } else {
        throw bad("unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_argument) throw;
    throw bad(e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, "config " + path.string() + ": " + e.what());
  }
  auto config = parse(doc, std::move(base));
  if (doc.contains("calibration") && std::filesystem::path(config.calibration).is_relative()) {
    config.calibration = (path.parent_path() / config.calibration).lexically_normal().string();
  }
  return config;
}

ExperimentConfig ExperimentConfig::parse(const nlohmann::json& doc) { return parse(doc, ExperimentConfig{}); }

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) { return load(path, ExperimentConfig{}); }

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["grid"] = paper_grid ? nlohmann::json("paper-grid") : nlohmann::json(grid);
  if (shots) j["shots"] = *shots;
  j["bits"] = bits;
  j["seed"] = seed;
  if (!calibration.empty()) j["calibration"] = calibration;
  nlohmann::json noise_doc = {{"ideal_readout", noise.ideal_readout}};
  if (noise.rx_angle_error) noise_doc["rx_angle_error"] = *noise.rx_angle_error;
  if (noise.ry_angle_error) noise_doc["ry_angle_error"] = *noise.ry_angle_error;
  if (noise.depolarizing_p) noise_doc["depolarizing_p"] = *noise.depolarizing_p;
  j["noise"] = noise_doc;
  if (backend.kind == BackendConfig::Kind::local) {
    j["backend"] = "local";
  } else {
    j["backend"] = {{"remote", backend.endpoint.url}, {"timeout_s", backend.endpoint.timeout.count()}};
  }
  j["out"] = out.string();
  j["workers"] = workers;
  return j;
}

std::vector<CircuitSpec> ExperimentConfig::specs(const Topology& topology) const {
  if (paper_grid) return enumerate_paper_grid(topology);
  std::vector<CircuitSpec> out;
  for (const auto& s : grid) out.push_back(normalized(s));
  return out;
}

void ExperimentConfig::validate(const Topology& topology) const {
  auto bad = [](const std::string& what) { return Error(Errc::invalid_argument, "config: " + what); };
  if (shots && *shots == 0) throw bad("shots must be >= 1");
  if (bits == 0) throw bad("bits must be >= 1");
  if (!paper_grid && grid.empty()) throw bad("grid is empty");
  if (backend.kind == BackendConfig::Kind::remote && backend.endpoint.url.empty()) throw bad("remote backend needs a URL");
  if (noise.depolarizing_p && !(*noise.depolarizing_p >= 0.0 && *noise.depolarizing_p <= 1.0)) {
    throw bad("depolarizing_p must lie in [0,1]");
  }
  std::map<std::string, bool> seen;
  for (const auto& s : specs(topology)) {
    try {
      transpile(build(s, topology), topology);
    } catch (const Error& e) {
      throw bad(spec_key(s) + ": " + e.what());
    }
    if (!seen.emplace(spec_key(s), true).second) throw bad("duplicate spec " + spec_key(s));
  }
}

std::size_t bits_per_shot(const CircuitSpec& spec) {
  if (spec.stream_qubit) return 1;
  switch (spec.family) {
    case Family::c2: return spec.qubits.size();
    case Family::c5: return spec.repetitions;
    default: return 1;
  }
}

std::size_t shots_for(const ExperimentConfig& config, const CircuitSpec& spec) {
  if (config.shots) return *config.shots;
  const std::size_t per = bits_per_shot(spec);
  return (config.bits + per - 1) / per;
}

std::uint64_t spec_seed(std::uint64_t config_seed, const CircuitSpec& spec) {
  return mix64(config_seed ^ mix64(fnv1a64(execution_key(normalized(spec)))));
}

NoiseProfile noise_profile(const CalibrationSnapshot& calib, const NoiseOverrides& overrides) {
  NoiseProfile p = overrides.ideal_readout ? NoiseProfile::ideal() : NoiseProfile::from_calibration(calib);
  if (overrides.rx_angle_error) p.rx_angle_error = *overrides.rx_angle_error;
  if (overrides.ry_angle_error) p.ry_angle_error = *overrides.ry_angle_error;
  if (overrides.depolarizing_p) p.depolarizing_p = *overrides.depolarizing_p;
  p.validate();
  return p;
}

ShotTable LocalBackend::execute(const Circuit& native, std::size_t shots, std::uint64_t seed) {
  return run(native, shots, noise_, seed, options_);
}

ShotTable RemoteBackend::execute(const Circuit& native, std::size_t shots, std::uint64_t) {
  return remote::submit_remote(native, shots, endpoint_);
}

bool RunManifest::ok() const {
  return std::none_of(entries.begin(), entries.end(), [](const ManifestEntry& e) { return e.error.has_value(); });
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j = {{"key", e.key},       {"spec", e.spec},    {"policy", policy_name(e.policy)},
                        {"file", e.file},     {"length", e.length}, {"shots", e.shots},
                        {"seed", e.seed},     {"started", e.started}, {"finished", e.finished}};
    j["ones_fraction"] = e.ones_fraction ? nlohmann::json(*e.ones_fraction) : nlohmann::json(nullptr);
    if (!e.histogram.empty()) j["histogram"] = e.histogram;
    if (e.error) j["error"] = *e.error;
    list.push_back(std::move(j));
  }
  return {{"tool_version", tool_version},
          {"calibration_digest", calibration_digest},
          {"calibration", nlohmann::json::parse(calibration.to_text())},
          {"entries", std::move(list)}};
}

RunManifest RunManifest::from_json(const nlohmann::json& doc, std::filesystem::path directory) {
  RunManifest m;
  m.directory = std::move(directory);
  try {
    m.tool_version = doc.at("tool_version").get<std::string>();
    m.calibration_digest = doc.at("calibration_digest").get<std::string>();
    m.calibration = CalibrationSnapshot::parse(doc.at("calibration").dump());
    for (const auto& j : doc.at("entries")) {
      ManifestEntry e;
      e.key = j.at("key").get<std::string>();
      e.spec = j.at("spec").get<CircuitSpec>();
      e.policy = parse_policy(j.at("policy").get<std::string>());
      e.file = j.at("file").get<std::string>();
      e.length = j.at("length").get<std::size_t>();
      e.shots = j.at("shots").get<std::size_t>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.started = j.value("started", "");
      e.finished = j.value("finished", "");
      if (!j.at("ones_fraction").is_null()) e.ones_fraction = j["ones_fraction"].get<double>();
      if (j.contains("histogram")) e.histogram = j["histogram"].get<std::vector<std::uint64_t>>();
      if (j.contains("error")) e.error = j["error"].get<std::string>();
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_format, std::string("manifest: ") + e.what());
  }
  return m;
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / "manifest.json" : path;
  std::ifstream in(file);
  if (!in) throw Error(Errc::io, "cannot open manifest " + file.string());
  try {
    return from_json(nlohmann::json::parse(in), file.parent_path());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::bad_format, "manifest " + file.string() + ": " + e.what());
  }
}

void RunManifest::save() const {
  std::filesystem::create_directories(directory);
  const auto final_path = directory / "manifest.json";
  const auto tmp = directory / "manifest.json.tmp";
  write_file(tmp, to_json().dump(2) + "\n");
  std::filesystem::rename(tmp, final_path);
}

RunManifest run_experiment(const ExperimentConfig& config, const ProgressFn& progress, std::shared_ptr<Backend> backend) {
  const Topology topology = Topology::spark();
  config.validate(topology);
  const CalibrationSnapshot calib =
      config.calibration.empty() ? default_calibration() : CalibrationSnapshot::load(config.calibration);
  if (calib.size() < topology.n_qubits()) {
    throw Error(Errc::invalid_argument, "calibration covers fewer qubits than the topology");
  }
  const auto specs = config.specs(topology);
  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  if (!backend) {
    if (config.backend.kind == BackendConfig::Kind::local) {
      // With several specs in flight each simulation runs single-threaded.
      backend = std::make_shared<LocalBackend>(noise_profile(calib, config.noise), RunOptions{workers > 1 ? 1u : 0u});
    } else {
      backend = std::make_shared<RemoteBackend>(config.backend.endpoint);
    }
  }

  RunManifest manifest;
  manifest.tool_version = std::string(tool_version());
  manifest.calibration = calib;
  manifest.calibration_digest = calibration_digest(calib);
  manifest.directory = config.out;
  const auto stream_dir = config.out / "streams";
  std::filesystem::create_directories(stream_dir);

  // Specs that differ only in the extracted qubit share one execution.
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto key = execution_key(specs[i]);
    auto [it, inserted] = group_of.emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  manifest.entries.resize(specs.size());
  std::mutex report_mutex;
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  auto worker = [&] {
    for (std::size_t g = next++; g < groups.size(); g = next++) {
      const auto& members = groups[g];
      const CircuitSpec& first = specs[members.front()];
      const std::uint64_t seed = spec_seed(config.seed, first);
      std::size_t shots = 0;
      for (std::size_t i : members) shots = std::max(shots, shots_for(config, specs[i]));
      const std::string started = now_utc();
      std::optional<ShotTable> table;
      std::optional<std::string> error;
      try {
        table = backend->execute(transpile(build(first, topology), topology), shots, seed);
      } catch (const std::exception& e) {
        error = e.what();
      }
      for (std::size_t i : members) {
        ManifestEntry& entry = manifest.entries[i];
        entry.spec = specs[i];
        entry.key = spec_key(specs[i]);
        entry.policy = policy_for(specs[i]);
        entry.shots = shots;
        entry.seed = seed;
        entry.started = started;
        try {
          if (error) throw Error(Errc::transport, *error);
          ShotTable view = *table;
          view.spec = specs[i];
          if (specs[i].family == Family::c3) view.source_qubit = ghz_source(specs[i].qubits, topology);
          const BitStream stream = extract(view, entry.policy);
          entry.file = "streams/" + entry.key + ".bin";
          entry.length = stream.size();
          entry.ones_fraction = ones_fraction(stream);
          if (specs[i].family == Family::c3) entry.histogram = outcome_histogram(view);
          save_stream(config.out / entry.file, stream, {stream.size(), specs[i], seed, entry.policy});
        } catch (const Error& e) {
          if (e.code() == Errc::io) {
            std::lock_guard lock(report_mutex);
            if (!fatal) fatal = std::current_exception();
            return;
          }
          entry.error = e.what();
          entry.file.clear();
          entry.length = 0;
        }
        entry.finished = now_utc();
        if (progress) {
          std::lock_guard lock(report_mutex);
          progress(entry);
        }
      }
    }
  };
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, groups.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);
  manifest.save();
  return manifest;
}

Evaluation evaluate(const RunManifest& manifest, const EvaluateOptions& options, const ProgressFn& progress) {
  Evaluation eval;
  std::vector<std::pair<CircuitSpec, double>> fractions;
  std::vector<biasfit::C3Observation> c3;
  for (const auto& entry : manifest.entries) {
    if (entry.error) {
      eval.skipped.emplace_back(entry.key, "generation failed: " + *entry.error);
      continue;
    }
    const BitStream stream = load_packed(manifest.directory / entry.file, entry.length);
    if (options.sts22) {
      if (stream.size() >= 100) eval.sts22.emplace_back(entry.key, sts22::run_battery(stream, options.params));
      else eval.skipped.emplace_back(entry.key, "sts22: fewer than 100 bits");
    }
    if (options.ent90b) {
      try {
        eval.ent90b.emplace_back(entry.key, ent90b::min_entropy(stream));
      } catch (const Error& e) {
        eval.skipped.emplace_back(entry.key, std::string("ent90b: ") + e.what());
      }
    }
    if (options.biasfit) {
      fractions.emplace_back(entry.spec, ones_fraction(stream));
      if (entry.spec.family == Family::c3 && !entry.histogram.empty()) c3.push_back({entry.spec, entry.histogram});
      eval.expected.emplace_back(entry.key, biasfit::expected_ones_fraction(manifest.calibration, entry.spec, options.bias));
    }
    if (progress) progress(entry);
  }
  if (options.biasfit) {
    const auto cells = biasfit::frequency_cells(fractions);
    if (!cells.empty()) eval.frequency = biasfit::frequency_summary(cells);
    if (!c3.empty()) eval.c3 = biasfit::c3_summary(manifest.calibration, c3);
  }
  return eval;
}

std::vector<std::filesystem::path> write_evaluation(const Evaluation& eval, const std::filesystem::path& dir,
                                                    std::size_t n_qubits) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back(dir / name);
  };
  if (!eval.sts22.empty()) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [key, report] : eval.sts22) doc[key] = sts22::to_json(report);
    put("sts22.json", doc.dump(2) + "\n");
    const auto heat = sts22_heatmap(eval.sts22);
    put("heatmap_sts22.tsv", heat.to_tsv());
    put("heatmap_sts22.json", heat.to_json().dump(2) + "\n");
  }
  if (!eval.ent90b.empty()) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [key, report] : eval.ent90b) doc[key] = ent90b::to_json(report);
    put("ent90b.json", doc.dump(2) + "\n");
    const auto heat = ent90b_heatmap(eval.ent90b);
    put("heatmap_90b.tsv", heat.to_tsv());
    put("heatmap_90b.json", heat.to_json().dump(2) + "\n");
  }
  if (eval.frequency) {
    put("ones_by_qubit.txt", biasfit::to_text(*eval.frequency));
    put("ones_by_qubit.json", biasfit::to_json(*eval.frequency).dump(2) + "\n");
  }
  if (eval.c3) {
    put("c3_fit.txt", biasfit::to_text(*eval.c3, n_qubits));
    put("c3_fit.json", biasfit::to_json(*eval.c3).dump(2) + "\n");
  }
  if (!eval.expected.empty()) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [key, v] : eval.expected) doc[key] = v;
    put("expected_ones.json", doc.dump(2) + "\n");
  }
  if (!eval.skipped.empty()) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [key, why] : eval.skipped) doc[key] = why;
    put("skipped.json", doc.dump(2) + "\n");
  }
  return written;
}

}  // namespace qrng
