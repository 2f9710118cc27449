#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "streams.hpp"
#include "suffix_array.hpp"

using namespace qrng;

namespace {

std::vector<std::uint32_t> naive_suffix_array(const std::vector<std::uint8_t>& s) {
  std::vector<std::uint32_t> sa(s.size());
  std::iota(sa.begin(), sa.end(), 0u);
  std::sort(sa.begin(), sa.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::lexicographical_compare(s.begin() + a, s.end(), s.begin() + b, s.end());
  });
  return sa;
}

std::map<std::string, std::uint64_t> tuple_counts(const std::vector<std::uint8_t>& s, std::size_t w) {
  std::map<std::string, std::uint64_t> counts;
  for (std::size_t i = 0; i + w <= s.size(); ++i) ++counts[std::string(s.begin() + i, s.begin() + i + w)];
  return counts;
}

std::vector<std::uint8_t> sample(std::uint64_t seed, std::size_t n, double p) {
  const BitStream b = fixtures::biased_stream(seed, n, p);
  return {b.begin(), b.end()};
}

}  // namespace

TEST(SuffixArray, MatchesNaiveSort) {
  for (std::size_t n : {1u, 2u, 3u, 17u, 100u, 1000u}) {
    for (double p : {0.5, 0.9}) {
      const auto s = sample(n, n, p);
      EXPECT_EQ(detail::suffix_array(s), naive_suffix_array(s)) << n << " " << p;
    }
  }
  const std::vector<std::uint8_t> same(50, 1);
  EXPECT_EQ(detail::suffix_array(same), naive_suffix_array(same));
}

TEST(SuffixArray, LcpMatchesDirectComparison) {
  const auto s = sample(3, 700, 0.7);
  const auto sa = detail::suffix_array(s);
  const auto lcp = detail::lcp_array(s, sa);
  ASSERT_EQ(lcp.size(), s.size());
  EXPECT_EQ(lcp[0], 0u);
  for (std::size_t k = 1; k < sa.size(); ++k) {
    std::uint32_t l = 0;
    while (sa[k - 1] + l < s.size() && sa[k] + l < s.size() && s[sa[k - 1] + l] == s[sa[k] + l]) ++l;
    EXPECT_EQ(lcp[k], l);
  }
}

TEST(SuffixArray, RepeatProfileMatchesTupleCounts) {
  for (double p : {0.5, 0.8}) {
    const auto s = sample(11, 1500, p);
    const auto prof = detail::repeat_profile(s);
    ASSERT_GE(prof.max_count.size(), 2u);
    const std::size_t longest = prof.pairs.size() - 1;
    for (std::size_t w = 1; w <= longest + 1; ++w) {
      const auto counts = tuple_counts(s, w);
      std::uint64_t mx = 0, pairs = 0;
      for (const auto& [k, c] : counts) {
        mx = std::max(mx, c);
        pairs += c * (c - 1) / 2;
      }
      if (w <= longest) {
        EXPECT_EQ(prof.max_count[w], mx) << w;
        EXPECT_EQ(prof.pairs[w], pairs) << w;
        EXPECT_GT(pairs, 0u);
      } else {
        EXPECT_EQ(pairs, 0u);  // nothing repeats beyond the profile
      }
    }
  }
}
