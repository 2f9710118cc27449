#pragma once

// SP 800-22 statistical test battery: 15 test families, 188 subtests at the
// default parameters, and the two multi-sequence aggregation methods.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/bits.hpp"

namespace qrng::sts22 {

enum class TestFamily {
  frequency,
  block_frequency,
  cumulative_sums,
  runs,
  longest_run,
  rank,
  spectral,
  nonoverlapping_template,
  overlapping_template,
  universal,
  approximate_entropy,
  random_excursions,
  random_excursions_variant,
  serial,
  linear_complexity,
};

/// Canonical report order.
inline constexpr std::array<TestFamily, 15> kFamilies = {
    TestFamily::frequency,          TestFamily::block_frequency,
    TestFamily::cumulative_sums,    TestFamily::runs,
    TestFamily::longest_run,        TestFamily::rank,
    TestFamily::spectral,           TestFamily::nonoverlapping_template,
    TestFamily::overlapping_template, TestFamily::universal,
    TestFamily::approximate_entropy, TestFamily::random_excursions,
    TestFamily::random_excursions_variant, TestFamily::serial,
    TestFamily::linear_complexity,
};

std::string_view family_name(TestFamily f);    // "BlockFrequency"
std::string_view family_abbrev(TestFamily f);  // heatmap label: "BF", "CS", "NOT", ...
TestFamily parse_test_family(std::string_view text);  // accepts either form

struct Sts22Params {
  std::size_t block_frequency_m = 128;
  std::size_t nonoverlapping_m = 9;     // 148 aperiodic templates at m = 9
  std::size_t overlapping_m = 9;        // only 9 is supported (fixed class probabilities)
  std::size_t approx_entropy_m = 10;
  std::size_t serial_m = 16;
  std::size_t linear_complexity_m = 500;
  std::size_t universal_l = 0;          // 0 = choose L and Q from n
  std::size_t universal_q = 0;
  /// When false, the minimum-length recommendations of BlockFrequency,
  /// NonOverlappingTemplate, Spectral, ApproximateEntropy and Serial are not
  /// enforced (short worked examples); structural requirements still apply.
  bool enforce_length_recommendations = true;

  /// Throws on structurally invalid values (independent of n).
  void validate() const;
};

/// nullopt means NotApplicable: the stream is too short for the test.
using PValue = std::optional<double>;

struct SubtestResult {
  TestFamily family;
  std::size_t index;  // 0-based within the family
  PValue p_value;
  double statistic;   // NaN when not applicable
};

std::size_t subtest_count(TestFamily f, const Sts22Params& params = {});
std::size_t total_subtests(const Sts22Params& params = {});

/// Heatmap column label for one subtest, e.g. "CS-2", "NOT-017", "REV+9".
std::string subtest_label(TestFamily f, std::size_t index);

/// Runs one family; always returns subtest_count(f) results. Throws for an empty
/// stream or invalid parameters.
std::vector<SubtestResult> run_test(TestFamily f, const BitStream& stream, const Sts22Params& params = {});

struct Sts22Report {
  std::size_t n = 0;
  std::vector<SubtestResult> results;  // canonical family order

  std::size_t count(TestFamily f) const;
  std::vector<SubtestResult> family(TestFamily f) const;
};

/// Every subtest of every family. Requires n >= 100.
Sts22Report run_battery(const BitStream& stream, const Sts22Params& params = {});

struct ProportionResult {
  std::size_t passed = 0;
  std::size_t sequences = 0;
  std::size_t threshold = 0;          // ceil(s((1-a) - 3 sqrt(a(1-a)/s)))
  std::size_t lenient_threshold = 0;  // same bound rounded down
  bool pass = false;
};

/// Counts p >= alpha among one p-value per sequence.
ProportionResult proportion_pass(std::span<const double> p_values, double alpha = 0.01);

struct UniformityResult {
  double chi2 = 0.0;
  double p_value = 1.0;
  std::array<std::size_t, 10> buckets{};
  bool pass = false;              // p_value >= kUniformityThreshold
  bool below_recommended = false;  // fewer than 55 p-values
};

inline constexpr double kUniformityThreshold = 1e-4;

/// 10-bucket chi-square (9 dof) of p-values against U[0,1].
UniformityResult uniformity(std::span<const double> p_values);

struct SubtestSummary {
  TestFamily family;
  std::size_t index;
  std::size_t not_applicable = 0;
  ProportionResult proportion;
  std::optional<UniformityResult> uniformity;  // absent when no sequence applied
};

/// Per-subtest proportion and uniformity across reports of equal length.
std::vector<SubtestSummary> summarize(std::span<const Sts22Report> reports, double alpha = 0.01);

/// {"n": .., "tests": {"Frequency": [{"p": 0.527089 | "NA", "statistic": ..}], ...}}
nlohmann::json to_json(const Sts22Report& report);
nlohmann::json to_json(const std::vector<SubtestSummary>& summary);

// Building blocks exposed for verification.

/// Aperiodic m-bit templates, MSB-first, ascending.
std::vector<std::uint32_t> aperiodic_templates(std::size_t m);

/// Berlekamp-Massey linear complexity over GF(2).
std::size_t linear_complexity(std::span<const std::uint8_t> bits);

/// Rank over GF(2) of a 32x32 matrix given as rows (bit j of row i = column j).
int gf2_rank32(std::array<std::uint32_t, 32> rows);

}  // namespace qrng::sts22
