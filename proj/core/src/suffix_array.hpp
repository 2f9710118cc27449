#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qrng::detail {

/// Suffix array of a byte string by prefix doubling with radix passes.
std::vector<std::uint32_t> suffix_array(std::span<const std::uint8_t> s);

/// lcp[k] = longest common prefix of suffixes sa[k-1] and sa[k]; lcp[0] = 0 (Kasai).
std::vector<std::uint32_t> lcp_array(std::span<const std::uint8_t> s, const std::vector<std::uint32_t>& sa);

/// Repeated-substring statistics for every length W in 1..max_lcp.
struct RepeatProfile {
  /// max_count[W] = occurrences of the most common W-tuple (overlapping), W >= 1.
  std::vector<std::uint64_t> max_count;
  /// pairs[W] = sum over distinct W-tuples of C(count, 2).
  std::vector<std::uint64_t> pairs;
};

/// Profile up to the largest repeated length; index 0 unused.
RepeatProfile repeat_profile(std::span<const std::uint8_t> s);

}  // namespace qrng::detail
