#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrng/bits.hpp"
#include "qrng/error.hpp"
#include "streams.hpp"

using namespace qrng;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("no qrng::Error thrown");
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qrng-bits-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Bits, PackedRoundTripAllShortLengths) {
  for (std::size_t n = 0; n <= 64; ++n) {
    const BitStream s = fixtures::chacha_stream(n + 1, n);
    std::stringstream buf;
    write_packed(s, buf);
    EXPECT_EQ(buf.str().size(), (n + 7) / 8);
    EXPECT_EQ(read_packed(buf, n), s) << n;
  }
}

TEST(Bits, PackedLayoutIsLsbFirst) {
  const BitStream s = fixtures::from_string("1000000001");
  std::stringstream buf;
  write_packed(s, buf);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 2u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 0x01);
  EXPECT_EQ(static_cast<unsigned char>(bytes[1]), 0x02);
}

TEST(Bits, ReadPackedRejectsShortSource) {
  std::stringstream buf(std::string(1, '\xff'));
  EXPECT_EQ(code_of([&] { read_packed(buf, 9); }), Errc::truncated);
}

TEST(Bits, AsciiParsing) {
  std::istringstream ok("10 1\n1");
  EXPECT_EQ(read_ascii(ok), fixtures::from_string("1011"));
  std::istringstream bad("10x1");
  EXPECT_EQ(code_of([&] { read_ascii(bad); }), Errc::bad_format);
}

TEST(Bits, ComplementAndSlice) {
  const BitStream s = fixtures::from_string("110100");
  EXPECT_EQ(s.complement(), fixtures::from_string("001011"));
  EXPECT_EQ(s.slice(2, 3), fixtures::from_string("010"));
  EXPECT_EQ(code_of([&] { s.slice(4, 3); }), Errc::out_of_range);
  EXPECT_THROW(BitStream(std::vector<std::uint8_t>{0, 2}), Error);
  EXPECT_DOUBLE_EQ(ones_fraction(s), 0.5);
}

TEST(Bits, SaveAndLoadWithSidecar) {
  const fs::path dir = scratch_dir("sidecar");
  const BitStream s = fixtures::chacha_stream(3, 1001);
  StreamMetadata meta{s.size(), CircuitSpec::make(Family::c5, GateChoice::rx, {3}), 42,
                      ExtractionPolicy::c5_time_order};
  save_stream(dir / "x.bin", s, meta);
  EXPECT_EQ(load_stream(dir / "x.bin"), s);
  const auto back = load_metadata(dir / "x.bin");
  EXPECT_EQ(back.length, 1001u);
  EXPECT_EQ(back.spec, meta.spec);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.policy, ExtractionPolicy::c5_time_order);
  EXPECT_EQ(code_of([&] { load_packed(dir / "x.bin", 2000); }), Errc::truncated);
  fs::resize_file(dir / "x.bin", 100);
  EXPECT_EQ(code_of([&] { load_stream(dir / "x.bin"); }), Errc::truncated);
  fs::remove_all(dir);
}

TEST(Bits, ExtractionPolicies) {
  const Topology spark = Topology::spark();
  const auto c2 = run_spec(CircuitSpec::make(Family::c2, GateChoice::h, {4, 1}), spark, 100, NoiseProfile::ideal(), 1);
  const BitStream flat = extract(c2, ExtractionPolicy::flatten);
  ASSERT_EQ(flat.size(), 200u);
  for (std::size_t s = 0; s < 100; ++s) {
    // qubit-ascending order within each shot
    const auto rec = c2.shot(s);
    const std::size_t col1 = c2.qubit_order()[0] == 1 ? 0 : 1;
    EXPECT_EQ(flat[2 * s], rec[col1]);
    EXPECT_EQ(flat[2 * s + 1], rec[1 - col1]);
  }
  EXPECT_EQ(code_of([&] { extract(c2, ExtractionPolicy::single_qubit); }), Errc::policy_mismatch);
  EXPECT_EQ(code_of([&] { extract(c2, ExtractionPolicy::c3_majority); }), Errc::policy_mismatch);

  auto c5spec = CircuitSpec::make(Family::c5, GateChoice::ry, {0});
  c5spec.repetitions = 3;
  const auto c5 = run_spec(c5spec, spark, 50, NoiseProfile::ideal(), 2);
  EXPECT_EQ(extract(c5, ExtractionPolicy::c5_time_order).size(), 150u);
  EXPECT_EQ(default_policy(c5spec), ExtractionPolicy::c5_time_order);

  auto stream_spec = CircuitSpec::make(Family::c2, GateChoice::h, {0, 1, 2, 3, 4});
  stream_spec.stream_qubit = 3;
  EXPECT_EQ(default_policy(stream_spec), ExtractionPolicy::single_qubit);
  const auto t = run_spec(stream_spec, spark, 64, NoiseProfile::ideal(), 3);
  const BitStream q3 = extract(t, ExtractionPolicy::single_qubit);
  for (std::size_t s = 0; s < 64; ++s) EXPECT_EQ(q3[s], t.shot(s)[3]);
}

TEST(Bits, MajorityTieUsesSource) {
  const Topology spark = Topology::spark();
  NoiseProfile noise;
  noise.readout.assign(5, {0.3, 0.3});
  const auto spec = CircuitSpec::make(Family::c3, GateChoice::h, {0, 2});
  const auto t = run_spec(spec, spark, 400, noise, 8);
  ASSERT_EQ(*t.source_qubit, 2u);
  const BitStream maj = extract(t, ExtractionPolicy::c3_majority);
  const BitStream src = extract(t, ExtractionPolicy::c3_source);
  EXPECT_EQ(maj, src);  // two qubits: every disagreement is a tie
}
