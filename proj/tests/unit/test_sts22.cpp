#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "qrng/error.hpp"
#include "qrng/sts22.hpp"
#include "streams.hpp"

using namespace qrng;
using namespace qrng::sts22;
using qrng::fixtures::from_string;

namespace {

Sts22Params relaxed() {
  Sts22Params p;
  p.enforce_length_recommendations = false;
  return p;
}

double p_of(TestFamily f, const BitStream& s, const Sts22Params& params = {}, std::size_t index = 0) {
  const auto r = run_test(f, s, params);
  EXPECT_TRUE(r.at(index).p_value.has_value());
  return r.at(index).p_value.value_or(-1.0);
}

// Reference values below were computed ahead of time with scipy from the
// textbook definitions of each statistic.

std::size_t naive_linear_complexity(const std::vector<std::uint8_t>& s) {
  const std::size_t n = s.size();
  std::vector<std::uint8_t> c(n + 1, 0), b(n + 1, 0);
  c[0] = b[0] = 1;
  std::size_t l = 0;
  long m = -1;
  for (std::size_t i = 0; i < n; ++i) {
    int d = s[i];
    for (std::size_t j = 1; j <= l; ++j) d ^= c[j] & s[i - j];
    if (d) {
      const auto t = c;
      for (std::size_t j = 0; j + i - m <= n; ++j) c[j + i - m] ^= b[j];
      if (2 * l <= i) {
        l = i + 1 - l;
        m = static_cast<long>(i);
        b = t;
      }
    }
  }
  return l;
}

int naive_rank(std::vector<std::vector<int>> a) {
  int rank = 0;
  const int rows = static_cast<int>(a.size()), cols = static_cast<int>(a[0].size());
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = -1;
    for (int r = rank; r < rows; ++r)
      if (a[r][c]) piv = r;
    if (piv < 0) continue;
    std::swap(a[piv], a[rank]);
    for (int r = 0; r < rows; ++r)
      if (r != rank && a[r][c])
        for (int k = 0; k < cols; ++k) a[r][k] ^= a[rank][k];
    ++rank;
  }
  return rank;
}

bool naive_aperiodic(std::uint32_t t, std::size_t m) {
  for (std::size_t shift = 1; shift < m; ++shift) {
    const std::uint32_t mask = (1u << (m - shift)) - 1;
    if ((t >> shift) == (t & mask)) return false;
  }
  return true;
}

}  // namespace

TEST(Sts22, FrequencyKnownAnswer) {
  // S = +2 over n = 10: p = erfc(2 / sqrt(10) / sqrt(2)).
  const double oracle = std::erfc(2.0 / std::sqrt(10.0) / std::numbers::sqrt2);
  EXPECT_NEAR(p_of(TestFamily::frequency, from_string("1011010101")), oracle, 1e-12);
  EXPECT_NEAR(oracle, 0.527089, 1e-6);
}

TEST(Sts22, RunsKnownAnswer) {
  // pi = 0.6, V = 7.
  const double oracle = std::erfc(std::abs(7 - 2 * 10 * 0.6 * 0.4) / (2 * std::sqrt(20.0) * 0.6 * 0.4));
  EXPECT_NEAR(p_of(TestFamily::runs, from_string("1001101011")), oracle, 1e-12);
  EXPECT_NEAR(oracle, 0.147232, 1e-6);
}

TEST(Sts22, RunsPrerequisiteFailure) {
  const auto r = run_test(TestFamily::runs, from_string("1111111111111111111101"));
  ASSERT_TRUE(r[0].p_value);
  EXPECT_EQ(*r[0].p_value, 0.0);
}

TEST(Sts22, BlockFrequencyExample) {
  Sts22Params p = relaxed();
  p.block_frequency_m = 3;
  EXPECT_NEAR(p_of(TestFamily::block_frequency, from_string("0110011010"), p), 0.8012519569, 1e-9);
  // Default gating: shorter than 100 bits is not applicable.
  Sts22Params strict;
  strict.block_frequency_m = 3;
  EXPECT_FALSE(run_test(TestFamily::block_frequency, from_string("0110011010"), strict)[0].p_value);
}

TEST(Sts22, CumulativeSumsExample) {
  const auto r = run_test(TestFamily::cumulative_sums, from_string("1011010111"));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r[0].statistic, 4.0);
  EXPECT_NEAR(*r[0].p_value, 0.4116586192, 1e-9);
}

TEST(Sts22, CumulativeSumsBackwardMatchesReversedForward) {
  const BitStream s = qrng::fixtures::chacha_stream(21, 5000);
  std::vector<std::uint8_t> rev(s.begin(), s.end());
  std::reverse(rev.begin(), rev.end());
  const auto fwd = run_test(TestFamily::cumulative_sums, s);
  const auto bwd = run_test(TestFamily::cumulative_sums, BitStream(rev));
  EXPECT_DOUBLE_EQ(fwd[1].statistic, bwd[0].statistic);
  EXPECT_DOUBLE_EQ(*fwd[1].p_value, *bwd[0].p_value);
}

TEST(Sts22, LongestRunExample) {
  const BitStream s = from_string(
      "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100"
      "111001101101100010110010");
  ASSERT_EQ(s.size(), 128u);
  const auto r = run_test(TestFamily::longest_run, s);
  EXPECT_NEAR(r[0].statistic, 4.882457463, 1e-8);
  EXPECT_NEAR(*r[0].p_value, 0.1806093182, 1e-9);
}

TEST(Sts22, ApproximateEntropyExample) {
  Sts22Params p = relaxed();
  p.approx_entropy_m = 3;
  EXPECT_NEAR(p_of(TestFamily::approximate_entropy, from_string("0100110101"), p), 0.2619611049, 1e-9);
}

TEST(Sts22, SerialExample) {
  Sts22Params p = relaxed();
  p.serial_m = 3;
  const auto r = run_test(TestFamily::serial, from_string("0011011101"), p);
  EXPECT_NEAR(*r[0].p_value, 0.8087921354, 1e-9);
  EXPECT_NEAR(*r[1].p_value, 0.6703200460, 1e-9);
}

TEST(Sts22, SpectralMatchesNaiveDft) {
  const BitStream s = qrng::fixtures::chacha_stream(5, 250);
  const std::size_t n = s.size();
  std::size_t below = 0;
  const double threshold = std::sqrt(std::log(1.0 / 0.05) * static_cast<double>(n));
  for (std::size_t k = 0; k < n / 2; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t j = 0; j < n; ++j)
      acc += (s[j] ? 1.0 : -1.0) * std::polar(1.0, -2.0 * std::numbers::pi * double(k * j) / double(n));
    below += std::abs(acc) < threshold;
  }
  const double n0 = 0.95 * n / 2.0;
  const double d = (double(below) - n0) / std::sqrt(n * 0.95 * 0.05 / 4.0);
  const auto r = run_test(TestFamily::spectral, s, relaxed());
  EXPECT_NEAR(r[0].statistic, d, 1e-9);
  EXPECT_NEAR(*r[0].p_value, std::erfc(std::abs(d) / std::numbers::sqrt2), 1e-12);
  EXPECT_FALSE(run_test(TestFamily::spectral, s)[0].p_value);  // under 1000 bits by default
}

TEST(Sts22, AperiodicTemplates) {
  for (std::size_t m = 2; m <= 10; ++m) {
    std::vector<std::uint32_t> want;
    for (std::uint32_t t = 0; t < (1u << m); ++t)
      if (naive_aperiodic(t, m)) want.push_back(t);
    EXPECT_EQ(aperiodic_templates(m), want) << m;
  }
  EXPECT_EQ(aperiodic_templates(9).size(), 148u);
}

TEST(Sts22, NonOverlappingTemplateCountsWithoutOverlap) {
  // Template 001 (first m = 3 template) in 8 blocks; counted by a direct scan.
  Sts22Params p = relaxed();
  p.nonoverlapping_m = 3;
  const BitStream s = qrng::fixtures::chacha_stream(9, 400);
  const auto r = run_test(TestFamily::nonoverlapping_template, s, p);
  ASSERT_EQ(r.size(), aperiodic_templates(3).size());
  const std::size_t m = 3, block = s.size() / 8;
  const double mu = (block - m + 1) / 8.0;
  const double var = block * (1.0 / 8 - (2.0 * m - 1) / 64.0);
  double chi2 = 0;
  for (std::size_t b = 0; b < 8; ++b) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i + m <= block;) {
      const std::size_t o = b * block + i;
      if (s[o] == 0 && s[o + 1] == 0 && s[o + 2] == 1) {
        ++hits;
        i += m;
      } else {
        ++i;
      }
    }
    chi2 += (hits - mu) * (hits - mu) / var;
  }
  EXPECT_NEAR(r[0].statistic, chi2, 1e-9);
}

TEST(Sts22, LinearComplexityMatchesNaive) {
  EXPECT_EQ(linear_complexity(from_string("1101011110001").bits()), 4u);
  for (std::size_t n : {1u, 2u, 7u, 63u, 64u, 65u, 200u, 500u, 777u}) {
    const BitStream s = qrng::fixtures::chacha_stream(n, n);
    const std::vector<std::uint8_t> v(s.begin(), s.end());
    EXPECT_EQ(linear_complexity(s.bits()), naive_linear_complexity(v)) << n;
  }
  const std::vector<std::uint8_t> zeros(100, 0);
  EXPECT_EQ(linear_complexity(zeros), 0u);
}

TEST(Sts22, Gf2RankMatchesNaive) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const BitStream s = qrng::fixtures::chacha_stream(seed, 1024);
    std::array<std::uint32_t, 32> rows{};
    std::vector<std::vector<int>> m(32, std::vector<int>(32));
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j) {
        m[i][j] = s[i * 32 + j];
        if (m[i][j]) rows[i] |= 1u << j;
      }
    if (seed % 7 == 0) {  // force a dependent row
      rows[5] = rows[3] ^ rows[9];
      for (int j = 0; j < 32; ++j) m[5][j] = m[3][j] ^ m[9][j];
    }
    EXPECT_EQ(gf2_rank32(rows), naive_rank(m));
  }
}

TEST(Sts22, SubtestLayout) {
  EXPECT_EQ(total_subtests(), 188u);
  EXPECT_EQ(subtest_count(TestFamily::nonoverlapping_template), 148u);
  EXPECT_EQ(subtest_count(TestFamily::random_excursions), 8u);
  EXPECT_EQ(subtest_count(TestFamily::random_excursions_variant), 18u);
  EXPECT_EQ(subtest_label(TestFamily::cumulative_sums, 1), "CS-2");
  EXPECT_EQ(subtest_label(TestFamily::nonoverlapping_template, 16), "NOT-017");
  EXPECT_EQ(subtest_label(TestFamily::random_excursions_variant, 17), "REV+9");
  EXPECT_EQ(subtest_label(TestFamily::random_excursions, 0), "RE-4");
  EXPECT_EQ(parse_test_family("BF"), TestFamily::block_frequency);
  EXPECT_EQ(parse_test_family("LinearComplexity"), TestFamily::linear_complexity);
  EXPECT_THROW(parse_test_family("Poker"), Error);
}

TEST(Sts22, ShortStreamsAreNotApplicable) {
  const BitStream s = qrng::fixtures::chacha_stream(1, 5000);
  for (auto f : {TestFamily::rank, TestFamily::overlapping_template, TestFamily::universal,
                 TestFamily::linear_complexity, TestFamily::random_excursions}) {
    const auto r = run_test(f, s);
    EXPECT_EQ(r.size(), subtest_count(f));
    for (const auto& x : r) {
      EXPECT_FALSE(x.p_value) << family_name(f);
      EXPECT_TRUE(std::isnan(x.statistic));
    }
  }
  EXPECT_THROW(run_test(TestFamily::frequency, BitStream{}), Error);
  EXPECT_THROW(run_battery(from_string("0101")), Error);
}

TEST(Sts22, ParamsValidation) {
  Sts22Params p;
  p.overlapping_m = 10;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.block_frequency_m = 0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Sts22, ProportionThresholds) {
  // 55 sequences: 55 * (0.99 - 3 sqrt(0.99 * 0.01 / 55)) = 52.786...
  const double bound = 55 * (0.99 - 3 * std::sqrt(0.99 * 0.01 / 55));
  std::vector<double> p(55, 0.5);
  auto r = proportion_pass(p);
  EXPECT_EQ(r.threshold, static_cast<std::size_t>(std::ceil(bound)));
  EXPECT_EQ(r.threshold, 53u);
  EXPECT_EQ(r.lenient_threshold, 52u);
  EXPECT_TRUE(r.pass);
  p[0] = p[1] = 0.001;
  EXPECT_TRUE(proportion_pass(p).pass);
  p[2] = 0.001;
  r = proportion_pass(p);
  EXPECT_EQ(r.passed, 52u);
  EXPECT_FALSE(r.pass);
}

TEST(Sts22, Uniformity) {
  std::vector<double> even;
  for (int i = 0; i < 100; ++i) even.push_back((i + 0.5) / 100);
  const auto u = uniformity(even);
  EXPECT_NEAR(u.chi2, 0.0, 1e-12);
  EXPECT_NEAR(u.p_value, 1.0, 1e-12);
  EXPECT_TRUE(u.pass);
  EXPECT_FALSE(u.below_recommended);
  const std::vector<double> clumped(60, 0.05);
  const auto c = uniformity(clumped);
  EXPECT_NEAR(c.chi2, 540.0, 1e-9);  // 9 * 6 + (60 - 6)^2 / 6
  EXPECT_FALSE(c.pass);
  EXPECT_TRUE(uniformity(std::vector<double>(10, 0.5)).below_recommended);
}

TEST(Sts22, BatteryShapeOnModerateStream) {
  const BitStream s = qrng::fixtures::chacha_stream(77, 20000);
  const auto report = run_battery(s);
  EXPECT_EQ(report.results.size(), 188u);
  EXPECT_EQ(report.count(TestFamily::nonoverlapping_template), 148u);
  std::set<std::string> labels;
  for (const auto& r : report.results) labels.insert(subtest_label(r.family, r.index));
  EXPECT_EQ(labels.size(), 188u);
  const auto j = to_json(report);
  EXPECT_EQ(j["n"], 20000);
  EXPECT_EQ(j["tests"]["OverlappingTemplate"][0]["p"], "NA");
}

TEST(Sts22, SummarizeAcrossReports) {
  std::vector<Sts22Report> reports;
  for (std::uint64_t seed = 0; seed < 12; ++seed) reports.push_back(run_battery(qrng::fixtures::chacha_stream(seed, 4096)));
  const auto summary = summarize(reports);
  ASSERT_EQ(summary.size(), 188u);
  EXPECT_EQ(summary[0].proportion.sequences, 12u);
  ASSERT_TRUE(summary[0].uniformity);
  EXPECT_TRUE(summary[0].uniformity->below_recommended);
  const auto& rank = summary[6];
  EXPECT_EQ(rank.family, TestFamily::rank);
  EXPECT_EQ(rank.not_applicable, 12u);
  EXPECT_FALSE(rank.uniformity);
}
