#include "suffix_array.hpp"

#include <algorithm>

namespace qrng::detail {

std::vector<std::uint32_t> suffix_array(std::span<const std::uint8_t> s) {
  // Cyclic-shift sort of s + sentinel, where the sentinel is smaller than every symbol.
  const std::size_t n = s.size() + 1;
  std::vector<std::uint32_t> p(n), c(n), pn(n), cn(n);
  std::vector<std::uint32_t> cnt(std::max<std::size_t>(n, 257), 0);
  auto sym = [&](std::size_t i) -> std::uint32_t { return i + 1 == n ? 0 : std::uint32_t{s[i]} + 1; };
  for (std::size_t i = 0; i < n; ++i) ++cnt[sym(i)];
  for (std::size_t i = 1; i < 257; ++i) cnt[i] += cnt[i - 1];
  for (std::size_t i = n; i-- > 0;) p[--cnt[sym(i)]] = static_cast<std::uint32_t>(i);
  std::uint32_t classes = 1;
  c[p[0]] = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (sym(p[i]) != sym(p[i - 1])) ++classes;
    c[p[i]] = classes - 1;
  }
  for (std::size_t h = 1; h < n && classes < n; h <<= 1) {
    for (std::size_t i = 0; i < n; ++i) pn[i] = static_cast<std::uint32_t>((p[i] + n - h) % n);
    std::fill(cnt.begin(), cnt.begin() + classes, 0);
    for (std::size_t i = 0; i < n; ++i) ++cnt[c[pn[i]]];
    for (std::size_t i = 1; i < classes; ++i) cnt[i] += cnt[i - 1];
    for (std::size_t i = n; i-- > 0;) p[--cnt[c[pn[i]]]] = pn[i];
    cn[p[0]] = 0;
    classes = 1;
    for (std::size_t i = 1; i < n; ++i) {
      const bool same = c[p[i]] == c[p[i - 1]] && c[(p[i] + h) % n] == c[(p[i - 1] + h) % n];
      if (!same) ++classes;
      cn[p[i]] = classes - 1;
    }
    c.swap(cn);
  }
  // p[0] is the sentinel suffix.
  return {p.begin() + 1, p.end()};
}

std::vector<std::uint32_t> lcp_array(std::span<const std::uint8_t> s, const std::vector<std::uint32_t>& sa) {
  const std::size_t n = s.size();
  std::vector<std::uint32_t> rank(n), lcp(n, 0);
  for (std::size_t i = 0; i < n; ++i) rank[sa[i]] = static_cast<std::uint32_t>(i);
  std::size_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rank[i] == 0) {
      h = 0;
      continue;
    }
    const std::size_t j = sa[rank[i] - 1];
    while (i + h < n && j + h < n && s[i + h] == s[j + h]) ++h;
    lcp[rank[i]] = static_cast<std::uint32_t>(h);
    if (h > 0) --h;
  }
  return lcp;
}

RepeatProfile repeat_profile(std::span<const std::uint8_t> s) {
  const std::size_t n = s.size();
  RepeatProfile out;
  if (n == 0) return out;
  const auto sa = suffix_array(s);
  const auto lcp = lcp_array(s, sa);
  const std::uint32_t max_lcp = *std::max_element(lcp.begin(), lcp.end());

  // For each adjacency k (1..n-1): extents of the LCP interval it bounds.
  std::vector<std::size_t> prev_le(n), prev_lt(n), next_lt(n, n);
  std::vector<std::size_t> stack;
  for (std::size_t k = 1; k < n; ++k) {
    while (!stack.empty() && lcp[stack.back()] > lcp[k]) stack.pop_back();
    prev_le[k] = stack.empty() ? 0 : stack.back();
    stack.push_back(k);
  }
  stack.clear();
  for (std::size_t k = 1; k < n; ++k) {
    while (!stack.empty() && lcp[stack.back()] >= lcp[k]) stack.pop_back();
    prev_lt[k] = stack.empty() ? 0 : stack.back();
    stack.push_back(k);
  }
  stack.clear();
  for (std::size_t k = n; k-- > 1;) {
    while (!stack.empty() && lcp[stack.back()] >= lcp[k]) stack.pop_back();
    next_lt[k] = stack.empty() ? n : stack.back();
    stack.push_back(k);
  }

  std::vector<std::uint64_t> diff(max_lcp + 2, 0), size_at(max_lcp + 2, 0);
  for (std::size_t k = 1; k < n; ++k) {
    const std::uint32_t h = lcp[k];
    if (h == 0) continue;
    // Pairs whose leftmost minimum adjacency is k.
    diff[h] += static_cast<std::uint64_t>(k - prev_le[k]) * (next_lt[k] - k);
    size_at[h] = std::max<std::uint64_t>(size_at[h], next_lt[k] - prev_lt[k]);
  }
  out.pairs.assign(max_lcp + 1, 0);
  out.max_count.assign(max_lcp + 1, 1);
  std::uint64_t pairs = 0, best = 1;
  for (std::size_t w = max_lcp; w >= 1; --w) {
    pairs += diff[w];
    best = std::max(best, size_at[w]);
    out.pairs[w] = pairs;
    out.max_count[w] = best;
  }
  return out;
}

}  // namespace qrng::detail
