#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "qrng/error.hpp"
#include "qrng/harness.hpp"
#include "qrng/json_io.hpp"

using namespace qrng;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qrng-harness-" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small_config(const fs::path& out) {
  auto c2 = CircuitSpec::make(Family::c2, GateChoice::h, {0, 1, 2, 3, 4});
  auto c2s0 = c2, c2s4 = c2;
  c2s0.stream_qubit = 0;
  c2s4.stream_qubit = 4;
  ExperimentConfig config;
  config.grid = {CircuitSpec::make(Family::c1, GateChoice::h, {0}), CircuitSpec::make(Family::c5, GateChoice::ry, {3}),
                 CircuitSpec::make(Family::c3, GateChoice::rx, {1, 2, 4}), c2s0, c2s4};
  config.bits = 4000;
  config.seed = 17;
  config.out = out;
  return config;
}

class FailingBackend : public Backend {
 public:
  ShotTable execute(const Circuit& native, std::size_t shots, std::uint64_t seed) override {
    if (native.measurements().front().qubits.size() > 1) throw Error(Errc::transport, "device offline");
    return run(native, shots, NoiseProfile::ideal(), seed);
  }
};

}  // namespace

TEST(Harness, ConfigParsing) {
  const auto doc = nlohmann::json::parse(R"({
    "grid": [{"family": "C3", "gate": "Ry", "qubits": [2, 0]}, {"family": "C5", "gate": "H", "qubits": [1]}],
    "shots": 500, "seed": 9, "noise": {"depolarizing_p": 0.01},
    "backend": {"remote": "http://127.0.0.1:9/run", "timeout_s": 5}, "out": "somewhere", "workers": 2})");
  const auto c = ExperimentConfig::parse(doc);
  ASSERT_EQ(c.grid.size(), 2u);
  EXPECT_EQ(c.grid[1].repetitions, 2u);
  EXPECT_EQ(*c.shots, 500u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.backend.kind, BackendConfig::Kind::remote);
  EXPECT_EQ(c.backend.endpoint.timeout.count(), 5);
  EXPECT_DOUBLE_EQ(*c.noise.depolarizing_p, 0.01);
  const auto again = ExperimentConfig::parse(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());

  ExperimentConfig base;
  base.seed = 123;
  const auto merged = ExperimentConfig::parse(nlohmann::json::parse(R"({"grid": "paper-grid"})"), base);
  EXPECT_TRUE(merged.paper_grid);
  EXPECT_EQ(merged.seed, 123u);
  EXPECT_EQ(merged.specs(Topology::spark()).size(), 105u);
}

TEST(Harness, ConfigErrorsAreInvalidArgument) {
  const char* bad[] = {
      R"({"grid": "all"})", R"({"colour": 1})", R"({"shots": "many"})",
      R"({"grid": [{"family": "C9", "gate": "H", "qubits": [0]}]})", R"({"backend": "quantum"})"};
  for (const char* text : bad) {
    try {
      ExperimentConfig::parse(nlohmann::json::parse(text));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_argument) << text;
    }
  }
  ExperimentConfig c;
  c.grid = {CircuitSpec::make(Family::c3, GateChoice::h, {0, 1})};
  EXPECT_THROW(c.validate(Topology::spark()), Error);  // not connectable
  c.grid = {CircuitSpec::make(Family::c1, GateChoice::h, {0}), CircuitSpec::make(Family::c1, GateChoice::h, {0})};
  EXPECT_THROW(c.validate(Topology::spark()), Error);  // duplicate
  c.grid = {CircuitSpec::make(Family::c1, GateChoice::h, {0})};
  c.shots = 0;
  EXPECT_THROW(c.validate(Topology::spark()), Error);
}

TEST(Harness, ShotsAndSeeds) {
  ExperimentConfig c;
  c.bits = 1001;
  auto c5 = CircuitSpec::make(Family::c5, GateChoice::h, {0});
  EXPECT_EQ(bits_per_shot(c5), 2u);
  EXPECT_EQ(shots_for(c, c5), 501u);
  auto c2 = CircuitSpec::make(Family::c2, GateChoice::h, {0, 1, 2});
  EXPECT_EQ(shots_for(c, c2), 334u);
  auto c2s = c2;
  c2s.stream_qubit = 1;
  EXPECT_EQ(shots_for(c, c2s), 1001u);
  EXPECT_EQ(spec_seed(5, c2), spec_seed(5, c2s));
  EXPECT_NE(spec_seed(5, c2), spec_seed(6, c2));
  EXPECT_NE(spec_seed(5, c5), spec_seed(5, CircuitSpec::make(Family::c5, GateChoice::h, {1})));
  c.shots = 10;
  EXPECT_EQ(shots_for(c, c5), 10u);
}

TEST(Harness, CalibrationDigest) {
  const auto calib = default_calibration();
  EXPECT_EQ(calib.size(), 5u);
  const std::string d = calibration_digest(calib);
  EXPECT_EQ(d.size(), 64u);
  EXPECT_EQ(d, calibration_digest(CalibrationSnapshot::parse(calib.to_text())));
  EXPECT_NE(d, calibration_digest(CalibrationSnapshot({{0.1, 0.1, 1, 1, 1, 1}})));
}

TEST(Harness, RunEvaluateRoundTrip) {
  const fs::path out = scratch_dir("roundtrip");
  auto config = small_config(out);
  config.workers = 1;
  std::size_t reported = 0;
  const auto m = run_experiment(config, [&](const ManifestEntry&) { ++reported; });
  EXPECT_EQ(reported, 5u);
  ASSERT_TRUE(m.ok());
  ASSERT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_FALSE(fs::exists(out / "manifest.json.tmp"));

  const auto loaded = RunManifest::load(out);
  ASSERT_EQ(loaded.entries.size(), 5u);
  EXPECT_EQ(loaded.calibration_digest, calibration_digest(default_calibration()));
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(loaded.entries[i].key, m.entries[i].key);
    EXPECT_EQ(loaded.entries[i].length, m.entries[i].length);
  }
  EXPECT_EQ(loaded.entries[0].length, 4000u);
  EXPECT_EQ(loaded.entries[1].length, 4000u);  // C5: 2000 shots x 2
  EXPECT_EQ(loaded.entries[2].histogram.size(), 8u);
  EXPECT_EQ(loaded.entries[3].seed, loaded.entries[4].seed);

  // Same config, more workers: identical streams.
  auto parallel = small_config(scratch_dir("roundtrip-par"));
  parallel.workers = 3;
  run_experiment(parallel);
  for (const auto& e : loaded.entries) {
    const auto a = load_stream(out / e.file);
    const auto b = load_stream(parallel.out / e.file);
    EXPECT_EQ(a, b) << e.key;
  }

  const auto eval = evaluate(loaded);
  EXPECT_EQ(eval.sts22.size(), 5u);
  EXPECT_EQ(eval.ent90b.size(), 5u);
  ASSERT_TRUE(eval.frequency);
  ASSERT_TRUE(eval.c3);
  EXPECT_EQ(eval.c3->rows.size(), 1u);
  const auto files = write_evaluation(eval, out / "reports");
  for (const char* name : {"sts22.json", "heatmap_sts22.tsv", "ent90b.json", "heatmap_90b.tsv", "ones_by_qubit.txt",
                           "c3_fit.txt", "expected_ones.json"})
    EXPECT_TRUE(fs::exists(out / "reports" / name)) << name;

  fs::resize_file(out / loaded.entries[0].file, 10);
  try {
    evaluate(loaded);
    FAIL() << "truncated stream accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::truncated);
  }
  fs::remove_all(out);
  fs::remove_all(parallel.out);
}

TEST(Harness, BackendFailuresAreRecordedPerSpec) {
  const fs::path out = scratch_dir("failing");
  auto config = small_config(out);
  const auto m = run_experiment(config, {}, std::make_shared<FailingBackend>());
  EXPECT_FALSE(m.ok());
  std::size_t failed = 0;
  for (const auto& e : m.entries) {
    if (e.error) {
      ++failed;
      EXPECT_TRUE(e.file.empty());
    } else {
      EXPECT_TRUE(fs::exists(out / e.file));
    }
  }
  EXPECT_EQ(failed, 3u);  // C3 and both C2 streams
  EvaluateOptions opts;
  opts.sts22 = false;
  const auto eval = evaluate(RunManifest::load(out / "manifest.json"), opts);
  EXPECT_EQ(eval.skipped.size(), 3u);
  EXPECT_EQ(eval.ent90b.size(), 2u);
  fs::remove_all(out);
}

TEST(Harness, NoiseOverrides) {
  NoiseOverrides o;
  o.ideal_readout = true;
  o.depolarizing_p = 0.02;
  const auto p = noise_profile(default_calibration(), o);
  EXPECT_TRUE(p.readout.empty());
  EXPECT_DOUBLE_EQ(p.depolarizing_p, 0.02);
  o.depolarizing_p = 2.0;
  EXPECT_THROW(noise_profile(default_calibration(), o), Error);
  const auto q = noise_profile(default_calibration(), {});
  ASSERT_EQ(q.readout.size(), 5u);
  EXPECT_DOUBLE_EQ(q.readout[0].p01, 0.03);
}
