#include "qrng/sts22.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <fftw3.h>

#include "qrng/error.hpp"
#include "qrng/special.hpp"
#include "sts22_templates.hpp"

namespace qrng::sts22 {

namespace {

using special::igamc;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kGeneralMinLength = 100;

using Bits = std::span<const std::uint8_t>;

std::vector<SubtestResult> not_applicable(TestFamily f, std::size_t count) {
  std::vector<SubtestResult> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back({f, i, std::nullopt, kNaN});
  return out;
}

std::vector<SubtestResult> single(TestFamily f, double p, double stat) {
  return {{f, 0, std::clamp(p, 0.0, 1.0), stat}};
}

int floor_log2(std::size_t n) { return static_cast<int>(std::bit_width(n)) - 1; }

/// Window value at position i of width m, first bit most significant, with cyclic wrap.
std::vector<std::uint32_t> cyclic_counts(Bits e, std::size_t m) {
  const std::size_t n = e.size();
  std::vector<std::uint32_t> counts(std::size_t{1} << m, 0);
  const std::uint32_t mask = static_cast<std::uint32_t>((std::uint64_t{1} << m) - 1);
  std::uint32_t w = 0;
  for (std::size_t j = 0; j < m; ++j) w = (w << 1) | e[j % n];
  for (std::size_t i = 0; i < n; ++i) {
    ++counts[w & mask];
    w = ((w << 1) | e[(i + m) % n]) & mask;
  }
  return counts;
}

/// Counts of (m-1)-bit cyclic windows derived from m-bit ones by dropping the last bit.
std::vector<std::uint32_t> marginal_counts(const std::vector<std::uint32_t>& counts) {
  std::vector<std::uint32_t> out(counts.size() / 2, 0);
  for (std::size_t v = 0; v < counts.size(); ++v) out[v >> 1] += counts[v];
  return out;
}

// --- individual tests ---------------------------------------------------------

std::vector<SubtestResult> frequency(Bits e) {
  const double n = static_cast<double>(e.size());
  long long sum = 0;
  for (auto b : e) sum += b ? 1 : -1;
  const double s_obs = std::abs(static_cast<double>(sum)) / std::sqrt(n);
  return single(TestFamily::frequency, std::erfc(s_obs / std::numbers::sqrt2), s_obs);
}

std::vector<SubtestResult> block_frequency(Bits e, std::size_t m, bool strict) {
  const std::size_t blocks = e.size() / m;
  if ((strict && e.size() < kGeneralMinLength) || blocks == 0) return not_applicable(TestFamily::block_frequency, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < m; ++j) ones += e[i * m + j];
    const double v = static_cast<double>(ones) / static_cast<double>(m) - 0.5;
    sum += v * v;
  }
  const double chi2 = 4.0 * static_cast<double>(m) * sum;
  return single(TestFamily::block_frequency, igamc(blocks / 2.0, chi2 / 2.0), chi2);
}

double cusum_p(long long n, long long z) {
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double zd = static_cast<double>(z);
  double sum1 = 0.0;
  for (long long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k) {
    sum1 += special::normal_cdf((4 * k + 1) * zd / sqrt_n) - special::normal_cdf((4 * k - 1) * zd / sqrt_n);
  }
  double sum2 = 0.0;
  for (long long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k) {
    sum2 += special::normal_cdf((4 * k + 3) * zd / sqrt_n) - special::normal_cdf((4 * k + 1) * zd / sqrt_n);
  }
  return 1.0 - sum1 + sum2;
}

std::vector<SubtestResult> cumulative_sums(Bits e) {
  const auto n = static_cast<long long>(e.size());
  long long s = 0, sup = 0, inf = 0;
  for (auto b : e) {
    s += b ? 1 : -1;
    sup = std::max(sup, s);
    inf = std::min(inf, s);
  }
  const long long z_fwd = std::max(sup, -inf);
  // Backward maximum excursion: max over suffix sums = max |total - prefix|.
  const long long total = s;
  const long long z_bwd = std::max(total - inf, sup - total);
  const double p_fwd = cusum_p(n, z_fwd);
  const double p_bwd = cusum_p(n, z_bwd);
  return {{TestFamily::cumulative_sums, 0, std::clamp(p_fwd, 0.0, 1.0), static_cast<double>(z_fwd)},
          {TestFamily::cumulative_sums, 1, std::clamp(p_bwd, 0.0, 1.0), static_cast<double>(z_bwd)}};
}

std::vector<SubtestResult> runs(Bits e) {
  const std::size_t n = e.size();
  if (n < 2) return not_applicable(TestFamily::runs, 1);
  const double nd = static_cast<double>(n);
  const double pi = static_cast<double>(std::count(e.begin(), e.end(), std::uint8_t{1})) / nd;
  std::size_t v = 1;
  for (std::size_t k = 1; k < n; ++k) v += e[k] != e[k - 1];
  // Frequency prerequisite failed: the test is defined to return 0.
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(nd)) return single(TestFamily::runs, 0.0, static_cast<double>(v));
  const double num = std::abs(static_cast<double>(v) - 2.0 * nd * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * nd) * pi * (1.0 - pi);
  return single(TestFamily::runs, std::erfc(num / den), static_cast<double>(v));
}

std::vector<SubtestResult> longest_run(Bits e) {
  const std::size_t n = e.size();
  if (n < 128) return not_applicable(TestFamily::longest_run, 1);
  std::size_t m;
  std::size_t v_min;
  std::vector<double> pi;
  if (n < 6272) {
    m = 8;
    v_min = 1;
    pi = {0.21484375, 0.3671875, 0.23046875, 0.1875};
  } else if (n < 750000) {
    m = 128;
    v_min = 4;
    pi = {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847};
  } else {
    m = 10000;
    v_min = 10;
    pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
  }
  const std::size_t k = pi.size() - 1;
  const std::size_t blocks = n / m;
  std::vector<double> nu(pi.size(), 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t run = 0, longest = 0;
    for (std::size_t j = 0; j < m; ++j) {
      run = e[b * m + j] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    const std::size_t cls = longest <= v_min ? 0 : std::min(longest - v_min, k);
    nu[cls] += 1.0;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double expected = static_cast<double>(blocks) * pi[i];
    chi2 += (nu[i] - expected) * (nu[i] - expected) / expected;
  }
  return single(TestFamily::longest_run, igamc(k / 2.0, chi2 / 2.0), chi2);
}

double rank_probability(int r) {
  double product = 1.0;
  for (int i = 0; i <= r - 1; ++i) {
    const double a = 1.0 - std::pow(2.0, i - 32);
    product *= a * a / (1.0 - std::pow(2.0, i - r));
  }
  return std::pow(2.0, r * (32 + 32 - r) - 32 * 32) * product;
}

std::vector<SubtestResult> rank(Bits e) {
  const std::size_t blocks = e.size() / 1024;
  if (blocks < 38) return not_applicable(TestFamily::rank, 1);
  std::size_t f32 = 0, f31 = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::array<std::uint32_t, 32> rows{};
    for (std::size_t i = 0; i < 32; ++i)
      for (std::size_t j = 0; j < 32; ++j)
        if (e[b * 1024 + i * 32 + j]) rows[i] |= std::uint32_t{1} << j;
    const int r = gf2_rank32(rows);
    if (r == 32) ++f32;
    else if (r == 31) ++f31;
  }
  const double n = static_cast<double>(blocks);
  const double p32 = rank_probability(32);
  const double p31 = rank_probability(31);
  const double p30 = 1.0 - (p32 + p31);
  const double f30 = n - static_cast<double>(f32 + f31);
  auto term = [n](double observed, double p) { return (observed - n * p) * (observed - n * p) / (n * p); };
  const double chi2 = term(static_cast<double>(f32), p32) + term(static_cast<double>(f31), p31) + term(f30, p30);
  return single(TestFamily::rank, std::exp(-chi2 / 2.0), chi2);
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<SubtestResult> spectral(Bits e, bool strict) {
  const std::size_t n = e.size();
  if (n < 2 || (strict && n < 1000)) return not_applicable(TestFamily::spectral, 1);
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) in[i] = e[i] ? 1.0 : -1.0;
  fftw_execute(plan);
  const double nd = static_cast<double>(n);
  const double threshold = std::sqrt(std::log(1.0 / 0.05) * nd);
  std::size_t below = 0;
  for (std::size_t k = 0; k < n / 2; ++k)
    if (std::hypot(out[k][0], out[k][1]) < threshold) ++below;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  const double n0 = 0.95 * nd / 2.0;
  const double d = (static_cast<double>(below) - n0) / std::sqrt(nd / 4.0 * 0.95 * 0.05);
  return single(TestFamily::spectral, std::erfc(std::abs(d) / std::numbers::sqrt2), d);
}

/// Non-cyclic window values of width m (first bit most significant) for positions 0..n-m.
std::vector<std::uint32_t> windows(Bits e, std::size_t m) {
  if (e.size() < m) return {};
  std::vector<std::uint32_t> w(e.size() - m + 1);
  const std::uint32_t mask = static_cast<std::uint32_t>((std::uint64_t{1} << m) - 1);
  std::uint32_t v = 0;
  for (std::size_t j = 0; j + 1 < m; ++j) v = (v << 1) | e[j];
  for (std::size_t i = 0; i < w.size(); ++i) {
    v = ((v << 1) | e[i + m - 1]) & mask;
    w[i] = v;
  }
  return w;
}

std::vector<SubtestResult> nonoverlapping_template(Bits e, std::size_t m, bool strict) {
  const auto templates = aperiodic_templates(m);
  constexpr std::size_t kBlocks = 8;
  const std::size_t block_len = e.size() / kBlocks;
  const double lambda = (static_cast<double>(block_len) - m + 1) / std::pow(2.0, m);
  if ((strict && e.size() < kGeneralMinLength) || block_len <= m || !(lambda > 0.0)) {
    return not_applicable(TestFamily::nonoverlapping_template, templates.size());
  }
  const double var = static_cast<double>(block_len) * (1.0 / std::pow(2.0, m) - (2.0 * m - 1.0) / std::pow(2.0, 2.0 * m));
  const auto w = windows(e, m);
  std::vector<SubtestResult> out;
  out.reserve(templates.size());
  for (std::size_t t = 0; t < templates.size(); ++t) {
    const std::uint32_t target = templates[t];
    double chi2 = 0.0;
    for (std::size_t b = 0; b < kBlocks; ++b) {
      const std::size_t base = b * block_len;
      std::size_t hits = 0;
      std::size_t i = 0;
      while (i <= block_len - m) {
        if (w[base + i] == target) {
          ++hits;
          i += m;
        } else {
          ++i;
        }
      }
      chi2 += (static_cast<double>(hits) - lambda) * (static_cast<double>(hits) - lambda) / var;
    }
    out.push_back({TestFamily::nonoverlapping_template, t, std::clamp(igamc(kBlocks / 2.0, chi2 / 2.0), 0.0, 1.0), chi2});
  }
  return out;
}

std::vector<SubtestResult> overlapping_template(Bits e, std::size_t m) {
  constexpr std::size_t kBlockLen = 1032;
  constexpr std::array<double, 6> pi = {0.364091, 0.185659, 0.139381, 0.100571, 0.0704323, 0.139865};
  const std::size_t n = e.size();
  if (n < 1000000) return not_applicable(TestFamily::overlapping_template, 1);
  const std::size_t blocks = n / kBlockLen;
  const auto w = windows(e, m);
  const std::uint32_t ones = static_cast<std::uint32_t>((std::uint64_t{1} << m) - 1);
  std::array<double, 6> nu{};
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i <= kBlockLen - m; ++i) hits += w[b * kBlockLen + i] == ones;
    nu[std::min<std::size_t>(hits, 5)] += 1.0;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const double expected = static_cast<double>(blocks) * pi[i];
    chi2 += (nu[i] - expected) * (nu[i] - expected) / expected;
  }
  return single(TestFamily::overlapping_template, igamc(5.0 / 2.0, chi2 / 2.0), chi2);
}

std::vector<SubtestResult> universal(Bits e, std::size_t l_override, std::size_t q_override) {
  static constexpr std::array<double, 17> expected = {0, 0, 0, 0, 0, 0, 5.2177052, 6.1962507, 7.1836656,
                                                      8.1764248, 9.1723243, 10.170032, 11.168765, 12.168070,
                                                      13.167693, 14.167488, 15.167379};
  static constexpr std::array<double, 17> variance = {0, 0, 0, 0, 0, 0, 2.954, 3.125, 3.238, 3.311,
                                                      3.356, 3.384, 3.401, 3.410, 3.416, 3.419, 3.421};
  static constexpr std::array<std::size_t, 11> min_n = {387840,    904960,    2068480,   4654080,
                                                        10342400,  22753280,  49643520,  107560960,
                                                        231669760, 496435200, 1059061760};
  const std::size_t n = e.size();
  std::size_t l = l_override;
  if (l == 0) {
    for (std::size_t i = 0; i < min_n.size(); ++i)
      if (n >= min_n[i]) l = 6 + i;
  }
  if (l < 6 || l > 16) return not_applicable(TestFamily::universal, 1);
  const std::size_t q = q_override ? q_override : 10 * (std::size_t{1} << l);
  if (n / l <= q) return not_applicable(TestFamily::universal, 1);
  const std::size_t k = n / l - q;
  const double ld = static_cast<double>(l);
  const double kd = static_cast<double>(k);
  const double c = 0.7 - 0.8 / ld + (4.0 + 32.0 / ld) * std::pow(kd, -3.0 / ld) / 15.0;
  const double sigma = c * std::sqrt(variance[l] / kd);
  std::vector<std::size_t> last(std::size_t{1} << l, 0);
  auto block = [&](std::size_t i) {  // 1-based block index
    std::size_t v = 0;
    for (std::size_t j = 0; j < l; ++j) v = (v << 1) | e[(i - 1) * l + j];
    return v;
  };
  for (std::size_t i = 1; i <= q; ++i) last[block(i)] = i;
  double sum = 0.0;
  for (std::size_t i = q + 1; i <= q + k; ++i) {
    const std::size_t v = block(i);
    sum += std::log2(static_cast<double>(i - last[v]));
    last[v] = i;
  }
  const double phi = sum / kd;
  const double arg = std::abs(phi - expected[l]) / (std::numbers::sqrt2 * sigma);
  return single(TestFamily::universal, std::erfc(arg), phi);
}

double apen_phi(const std::vector<std::uint32_t>& counts, double n) {
  double sum = 0.0;
  for (auto c : counts)
    if (c > 0) sum += c * std::log(c / n);
  return sum / n;
}

std::vector<SubtestResult> approximate_entropy(Bits e, std::size_t m, bool strict) {
  const std::size_t n = e.size();
  if (n <= m || (strict && (n < kGeneralMinLength || static_cast<int>(m) >= floor_log2(n) - 5))) {
    return not_applicable(TestFamily::approximate_entropy, 1);
  }
  const double nd = static_cast<double>(n);
  const auto counts_m1 = cyclic_counts(e, m + 1);
  const auto counts_m = marginal_counts(counts_m1);
  const double apen = apen_phi(counts_m, nd) - apen_phi(counts_m1, nd);
  const double chi2 = 2.0 * nd * (std::log(2.0) - apen);
  return single(TestFamily::approximate_entropy, igamc(std::pow(2.0, static_cast<double>(m) - 1), chi2 / 2.0), chi2);
}

/// Partial sums S_1..S_n and the number of zero-return cycles J.
struct Walk {
  std::vector<int> s;
  std::size_t cycles = 0;
};

Walk random_walk(Bits e) {
  Walk w;
  w.s.resize(e.size());
  int acc = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    acc += e[i] ? 1 : -1;
    w.s[i] = acc;
    if (acc == 0) ++w.cycles;
  }
  if (!w.s.empty() && w.s.back() != 0) ++w.cycles;
  return w;
}

bool enough_cycles(const Walk& w, std::size_t n) {
  const double constraint = std::max(0.005 * std::sqrt(static_cast<double>(n)), 500.0);
  return static_cast<double>(w.cycles) >= constraint;
}

double excursion_pi(int x, std::size_t k) {
  const double ax = std::abs(x);
  const double q = 1.0 - 1.0 / (2.0 * ax);
  if (k == 0) return q;
  if (k < 5) return 1.0 / (4.0 * ax * ax) * std::pow(q, static_cast<double>(k) - 1.0);
  return 1.0 / (2.0 * ax) * std::pow(q, 4.0);
}

std::vector<SubtestResult> random_excursions(Bits e) {
  constexpr std::array<int, 8> states = {-4, -3, -2, -1, 1, 2, 3, 4};
  const Walk w = random_walk(e);
  if (!enough_cycles(w, e.size())) return not_applicable(TestFamily::random_excursions, states.size());
  std::array<std::array<double, 8>, 6> nu{};
  std::array<std::size_t, 8> visits{};
  auto close_cycle = [&] {
    for (std::size_t i = 0; i < 8; ++i) {
      nu[std::min<std::size_t>(visits[i], 5)][i] += 1.0;
      visits[i] = 0;
    }
  };
  for (int s : w.s) {
    if (s == 0) {
      close_cycle();
      continue;
    }
    if (s >= -4 && s <= 4) ++visits[s < 0 ? s + 4 : s + 3];
  }
  if (w.s.back() != 0) close_cycle();
  const double j = static_cast<double>(w.cycles);
  std::vector<SubtestResult> out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    double chi2 = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
      const double expected = j * excursion_pi(states[i], k);
      chi2 += (nu[k][i] - expected) * (nu[k][i] - expected) / expected;
    }
    out.push_back({TestFamily::random_excursions, i, std::clamp(igamc(2.5, chi2 / 2.0), 0.0, 1.0), chi2});
  }
  return out;
}

std::vector<SubtestResult> random_excursions_variant(Bits e) {
  const Walk w = random_walk(e);
  if (!enough_cycles(w, e.size())) return not_applicable(TestFamily::random_excursions_variant, 18);
  std::array<std::size_t, 19> count{};  // index s + 9
  for (int s : w.s)
    if (s >= -9 && s <= 9) ++count[static_cast<std::size_t>(s + 9)];
  const double j = static_cast<double>(w.cycles);
  std::vector<SubtestResult> out;
  std::size_t idx = 0;
  for (int x = -9; x <= 9; ++x) {
    if (x == 0) continue;
    const double xi = static_cast<double>(count[static_cast<std::size_t>(x + 9)]);
    const double p = std::erfc(std::abs(xi - j) / std::sqrt(2.0 * j * (4.0 * std::abs(x) - 2.0)));
    out.push_back({TestFamily::random_excursions_variant, idx++, std::clamp(p, 0.0, 1.0), xi});
  }
  return out;
}

double psi2(const std::vector<std::uint32_t>& counts, double n) {
  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c) * static_cast<double>(c);
  return sum * static_cast<double>(counts.size()) / n - n;
}

std::vector<SubtestResult> serial(Bits e, std::size_t m, bool strict) {
  const std::size_t n = e.size();
  if (n < m || (strict && (n < kGeneralMinLength || static_cast<int>(m) >= floor_log2(n) - 2))) {
    return not_applicable(TestFamily::serial, 2);
  }
  const double nd = static_cast<double>(n);
  const auto c0 = cyclic_counts(e, m);
  const auto c1 = marginal_counts(c0);
  const double psim0 = psi2(c0, nd);
  const double psim1 = m >= 2 ? psi2(c1, nd) : 0.0;
  const double psim2 = m >= 3 ? psi2(marginal_counts(c1), nd) : 0.0;
  const double del1 = psim0 - psim1;
  const double del2 = psim0 - 2.0 * psim1 + psim2;
  const double md = static_cast<double>(m);
  return {{TestFamily::serial, 0, std::clamp(igamc(std::pow(2.0, md - 1) / 2.0, del1 / 2.0), 0.0, 1.0), del1},
          {TestFamily::serial, 1, std::clamp(igamc(std::pow(2.0, md - 2) / 2.0, del2 / 2.0), 0.0, 1.0), del2}};
}

std::vector<SubtestResult> linear_complexity_test(Bits e, std::size_t m) {
  const std::size_t blocks = e.size() / m;
  if (blocks < 200) return not_applicable(TestFamily::linear_complexity, 1);
  constexpr std::array<double, 7> pi = {1.0 / 96, 1.0 / 32, 1.0 / 8, 1.0 / 2, 1.0 / 4, 1.0 / 16, 1.0 / 48};
  const double md = static_cast<double>(m);
  const double mean = md / 2.0 + (9.0 + (m % 2 == 0 ? -1.0 : 1.0)) / 36.0 - (md / 3.0 + 2.0 / 9.0) / std::pow(2.0, md);
  const double sign = m % 2 == 0 ? 1.0 : -1.0;
  std::array<double, 7> nu{};
  for (std::size_t b = 0; b < blocks; ++b) {
    const double l = static_cast<double>(linear_complexity(e.subspan(b * m, m)));
    const double t = sign * (l - mean) + 2.0 / 9.0;
    std::size_t cls;
    if (t <= -2.5) cls = 0;
    else if (t <= -1.5) cls = 1;
    else if (t <= -0.5) cls = 2;
    else if (t <= 0.5) cls = 3;
    else if (t <= 1.5) cls = 4;
    else if (t <= 2.5) cls = 5;
    else cls = 6;
    nu[cls] += 1.0;
  }
  double chi2 = 0.0;
  const double nb = static_cast<double>(blocks);
  for (std::size_t i = 0; i < 7; ++i) chi2 += (nu[i] - nb * pi[i]) * (nu[i] - nb * pi[i]) / (nb * pi[i]);
  return single(TestFamily::linear_complexity, igamc(3.0, chi2 / 2.0), chi2);
}

}  // namespace

// --- names -----------------------------------------------------------------

std::string_view family_name(TestFamily f) {
  switch (f) {
    case TestFamily::frequency: return "Frequency";
    case TestFamily::block_frequency: return "BlockFrequency";
    case TestFamily::cumulative_sums: return "CumulativeSums";
    case TestFamily::runs: return "Runs";
    case TestFamily::longest_run: return "LongestRun";
    case TestFamily::rank: return "Rank";
    case TestFamily::spectral: return "Spectral";
    case TestFamily::nonoverlapping_template: return "NonOverlappingTemplate";
    case TestFamily::overlapping_template: return "OverlappingTemplate";
    case TestFamily::universal: return "Universal";
    case TestFamily::approximate_entropy: return "ApproximateEntropy";
    case TestFamily::random_excursions: return "RandomExcursions";
    case TestFamily::random_excursions_variant: return "RandomExcursionsVariant";
    case TestFamily::serial: return "Serial";
    case TestFamily::linear_complexity: return "LinearComplexity";
  }
  return "?";
}

std::string_view family_abbrev(TestFamily f) {
  switch (f) {
    case TestFamily::frequency: return "Frq";
    case TestFamily::block_frequency: return "BF";
    case TestFamily::cumulative_sums: return "CS";
    case TestFamily::runs: return "Rns";
    case TestFamily::longest_run: return "LR";
    case TestFamily::rank: return "Rnk";
    case TestFamily::spectral: return "FFT";
    case TestFamily::nonoverlapping_template: return "NOT";
    case TestFamily::overlapping_template: return "OT";
    case TestFamily::universal: return "Unv";
    case TestFamily::approximate_entropy: return "AE";
    case TestFamily::random_excursions: return "RE";
    case TestFamily::random_excursions_variant: return "REV";
    case TestFamily::serial: return "Srl";
    case TestFamily::linear_complexity: return "LC";
  }
  return "?";
}

TestFamily parse_test_family(std::string_view text) {
  for (TestFamily f : kFamilies)
    if (family_name(f) == text || family_abbrev(f) == text) return f;
  throw Error(Errc::invalid_argument, "unknown test family '" + std::string(text) + "'");
}

void Sts22Params::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
  if (block_frequency_m < 2) fail("block_frequency_m must be >= 2");
  if (nonoverlapping_m < 2 || nonoverlapping_m > 21) fail("nonoverlapping_m must lie in 2..21");
  if (overlapping_m != 9) fail("overlapping_m: only m = 9 is supported");
  if (approx_entropy_m < 1 || approx_entropy_m > 24) fail("approx_entropy_m must lie in 1..24");
  if (serial_m < 2 || serial_m > 24) fail("serial_m must lie in 2..24");
  if (linear_complexity_m < 2) fail("linear_complexity_m must be >= 2");
  if (universal_l != 0 && (universal_l < 6 || universal_l > 16)) fail("universal_l must lie in 6..16");
  if (universal_q != 0 && universal_l == 0) fail("universal_q requires universal_l");
}

std::size_t subtest_count(TestFamily f, const Sts22Params& params) {
  switch (f) {
    case TestFamily::cumulative_sums:
    case TestFamily::serial: return 2;
    case TestFamily::nonoverlapping_template: return aperiodic_templates(params.nonoverlapping_m).size();
    case TestFamily::random_excursions: return 8;
    case TestFamily::random_excursions_variant: return 18;
    default: return 1;
  }
}

std::size_t total_subtests(const Sts22Params& params) {
  std::size_t total = 0;
  for (TestFamily f : kFamilies) total += subtest_count(f, params);
  return total;
}

std::string subtest_label(TestFamily f, std::size_t index) {
  const std::string base(family_abbrev(f));
  switch (f) {
    case TestFamily::cumulative_sums:
    case TestFamily::serial: return base + "-" + std::to_string(index + 1);
    case TestFamily::nonoverlapping_template: {
      std::string num = std::to_string(index + 1);
      return base + "-" + std::string(3 - std::min<std::size_t>(3, num.size()), '0') + num;
    }
    case TestFamily::random_excursions: {
      static constexpr int states[] = {-4, -3, -2, -1, 1, 2, 3, 4};
      const int x = states[index % 8];
      return base + (x > 0 ? "+" : "") + std::to_string(x);
    }
    case TestFamily::random_excursions_variant: {
      const int x = static_cast<int>(index) < 9 ? static_cast<int>(index) - 9 : static_cast<int>(index) - 8;
      return base + (x > 0 ? "+" : "") + std::to_string(x);
    }
    default: return base;
  }
}

std::vector<std::uint32_t> aperiodic_templates(std::size_t m) {
  if (m == 9) return {detail::kTemplates9.begin(), detail::kTemplates9.end()};
  if (m < 2 || m > 21) throw Error(Errc::invalid_argument, "template length must lie in 2..21");
  std::vector<std::uint32_t> out;
  for (std::uint32_t t = 0; t < (1u << m); ++t) {
    bool aperiodic = true;
    for (std::size_t shift = 1; shift < m && aperiodic; ++shift) {
      // prefix of length m-shift equals suffix of length m-shift
      const std::uint32_t prefix = t >> shift;
      const std::uint32_t suffix = t & ((1u << (m - shift)) - 1);
      aperiodic = prefix != suffix;
    }
    if (aperiodic) out.push_back(t);
  }
  return out;
}

std::size_t linear_complexity(std::span<const std::uint8_t> s) {
  // Bit-packed Berlekamp-Massey. C and B hold connection polynomial coefficients,
  // bit i = coefficient of x^i. The discrepancy at step N is the parity of
  // sum_{i=0..L} c_i s_{N-i}, read from the reversed sequence.
  const std::size_t n = s.size();
  if (n == 0) return 0;
  const std::size_t words = n / 64 + 2;
  std::vector<std::uint64_t> rev(words + 1, 0);  // rev bit k = s[n-1-k]
  for (std::size_t k = 0; k < n; ++k)
    if (s[n - 1 - k]) rev[k / 64] |= std::uint64_t{1} << (k % 64);
  auto rev_word = [&](std::size_t bit_offset) {
    const std::size_t w = bit_offset / 64;
    const std::size_t sh = bit_offset % 64;
    std::uint64_t v = rev[w] >> sh;
    if (sh && w + 1 < rev.size()) v |= rev[w + 1] << (64 - sh);
    return v;
  };
  std::vector<std::uint64_t> c(words, 0), b(words, 0), t(words);
  c[0] = b[0] = 1;
  std::size_t l = 0;
  long long m = -1;
  for (std::size_t step = 0; step < n; ++step) {
    // s_{step-i} = rev bit (n-1-step+i)
    const std::size_t offset = n - 1 - step;
    std::uint64_t acc = 0;
    const std::size_t used_words = l / 64 + 1;
    for (std::size_t w = 0; w < used_words; ++w) {
      std::uint64_t cw = c[w];
      if (w == used_words - 1 && (l % 64) != 63) cw &= (std::uint64_t{2} << (l % 64)) - 1;
      acc ^= cw & rev_word(offset + 64 * w);
    }
    if (!(std::popcount(acc) & 1)) continue;
    t = c;
    const std::size_t shift = static_cast<std::size_t>(static_cast<long long>(step) - m);
    const std::size_t ws = shift / 64, bs = shift % 64;
    for (std::size_t w = words; w-- > ws;) {
      std::uint64_t v = b[w - ws] << bs;
      if (bs && w > ws) v |= b[w - ws - 1] >> (64 - bs);
      c[w] ^= v;
    }
    if (2 * l <= step) {
      l = step + 1 - l;
      m = static_cast<long long>(step);
      b = t;
    }
  }
  return l;
}

int gf2_rank32(std::array<std::uint32_t, 32> rows) {
  int rank = 0;
  for (int col = 0; col < 32 && rank < 32; ++col) {
    const std::uint32_t bit = std::uint32_t{1} << col;
    int pivot = -1;
    for (int r = rank; r < 32; ++r)
      if (rows[r] & bit) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (int r = 0; r < 32; ++r)
      if (r != rank && (rows[r] & bit)) rows[r] ^= rows[rank];
    ++rank;
  }
  return rank;
}

std::vector<SubtestResult> run_test(TestFamily f, const BitStream& stream, const Sts22Params& params) {
  if (stream.empty()) throw Error(Errc::invalid_argument, "statistical tests need a nonempty stream");
  params.validate();
  const Bits e = stream.bits();
  const bool strict = params.enforce_length_recommendations;
  switch (f) {
    case TestFamily::frequency: return frequency(e);
    case TestFamily::block_frequency: return block_frequency(e, params.block_frequency_m, strict);
    case TestFamily::cumulative_sums: return cumulative_sums(e);
    case TestFamily::runs: return runs(e);
    case TestFamily::longest_run: return longest_run(e);
    case TestFamily::rank: return rank(e);
    case TestFamily::spectral: return spectral(e, strict);
    case TestFamily::nonoverlapping_template: return nonoverlapping_template(e, params.nonoverlapping_m, strict);
    case TestFamily::overlapping_template: return overlapping_template(e, params.overlapping_m);
    case TestFamily::universal: return universal(e, params.universal_l, params.universal_q);
    case TestFamily::approximate_entropy: return approximate_entropy(e, params.approx_entropy_m, strict);
    case TestFamily::random_excursions: return random_excursions(e);
    case TestFamily::random_excursions_variant: return random_excursions_variant(e);
    case TestFamily::serial: return serial(e, params.serial_m, strict);
    case TestFamily::linear_complexity: return linear_complexity_test(e, params.linear_complexity_m);
  }
  throw Error(Errc::invalid_argument, "unknown test family");
}

std::size_t Sts22Report::count(TestFamily f) const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [f](const SubtestResult& r) { return r.family == f; }));
}

std::vector<SubtestResult> Sts22Report::family(TestFamily f) const {
  std::vector<SubtestResult> out;
  std::copy_if(results.begin(), results.end(), std::back_inserter(out),
               [f](const SubtestResult& r) { return r.family == f; });
  return out;
}

Sts22Report run_battery(const BitStream& stream, const Sts22Params& params) {
  if (stream.size() < kGeneralMinLength) {
    throw Error(Errc::invalid_argument, "the battery needs at least 100 bits");
  }
  params.validate();
  Sts22Report report;
  report.n = stream.size();
  std::vector<std::vector<SubtestResult>> parts(kFamilies.size());
  if (std::thread::hardware_concurrency() > 1) {
    std::vector<std::future<std::vector<SubtestResult>>> jobs;
    for (TestFamily f : kFamilies)
      jobs.push_back(std::async(std::launch::async, [&, f] { return run_test(f, stream, params); }));
    for (std::size_t i = 0; i < jobs.size(); ++i) parts[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < kFamilies.size(); ++i) parts[i] = run_test(kFamilies[i], stream, params);
  }
  for (auto& p : parts) report.results.insert(report.results.end(), p.begin(), p.end());
  return report;
}

ProportionResult proportion_pass(std::span<const double> p_values, double alpha) {
  if (p_values.empty()) throw Error(Errc::invalid_argument, "proportion needs at least one sequence");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::invalid_argument, "alpha must lie in (0,1)");
  ProportionResult r;
  r.sequences = p_values.size();
  r.passed = static_cast<std::size_t>(std::count_if(p_values.begin(), p_values.end(), [alpha](double p) { return p >= alpha; }));
  const double s = static_cast<double>(r.sequences);
  const double bound = s * ((1.0 - alpha) - 3.0 * std::sqrt(alpha * (1.0 - alpha) / s));
  r.threshold = bound <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(bound));
  r.lenient_threshold = bound <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(bound));
  r.pass = r.passed >= r.threshold;
  return r;
}

UniformityResult uniformity(std::span<const double> p_values) {
  if (p_values.empty()) throw Error(Errc::invalid_argument, "uniformity needs at least one p-value");
  UniformityResult r;
  for (double p : p_values) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw Error(Errc::invalid_argument, "p-values must lie in [0,1]");
    r.buckets[std::min<std::size_t>(static_cast<std::size_t>(p * 10.0), 9)] += 1;
  }
  const double expected = static_cast<double>(p_values.size()) / 10.0;
  for (auto f : r.buckets) r.chi2 += (static_cast<double>(f) - expected) * (static_cast<double>(f) - expected) / expected;
  r.p_value = igamc(9.0 / 2.0, r.chi2 / 2.0);
  r.pass = r.p_value >= kUniformityThreshold;
  r.below_recommended = p_values.size() < 55;
  return r;
}

std::vector<SubtestSummary> summarize(std::span<const Sts22Report> reports, double alpha) {
  if (reports.empty()) throw Error(Errc::invalid_argument, "summary needs at least one report");
  const std::size_t rows = reports.front().results.size();
  for (const auto& r : reports)
    if (r.results.size() != rows) throw Error(Errc::invalid_argument, "reports disagree on subtest layout");
  std::vector<SubtestSummary> out;
  for (std::size_t i = 0; i < rows; ++i) {
    SubtestSummary s{reports.front().results[i].family, reports.front().results[i].index, 0, {}, std::nullopt};
    std::vector<double> ps;
    for (const auto& r : reports) {
      if (r.results[i].p_value) ps.push_back(*r.results[i].p_value);
      else ++s.not_applicable;
    }
    if (!ps.empty()) {
      s.proportion = proportion_pass(ps, alpha);
      s.uniformity = uniformity(ps);
    }
    out.push_back(s);
  }
  return out;
}

namespace {

nlohmann::json p_json(const PValue& p) {
  if (!p) return "NA";
  return std::round(*p * 1e6) / 1e6;
}

}  // namespace

nlohmann::json to_json(const Sts22Report& report) {
  nlohmann::json tests = nlohmann::json::object();
  for (TestFamily f : kFamilies) {
    auto& arr = tests[std::string(family_name(f))] = nlohmann::json::array();
    for (const auto& r : report.results) {
      if (r.family != f) continue;
      nlohmann::json row = {{"label", subtest_label(f, r.index)}, {"p", p_json(r.p_value)}};
      row["statistic"] = std::isfinite(r.statistic) ? nlohmann::json(r.statistic) : nlohmann::json(nullptr);
      arr.push_back(std::move(row));
    }
  }
  return {{"n", report.n}, {"subtests", report.results.size()}, {"tests", std::move(tests)}};
}

nlohmann::json to_json(const std::vector<SubtestSummary>& summary) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : summary) {
    nlohmann::json row = {{"label", subtest_label(s.family, s.index)},
                          {"family", family_name(s.family)},
                          {"not_applicable", s.not_applicable}};
    if (s.uniformity) {
      row["passed"] = s.proportion.passed;
      row["sequences"] = s.proportion.sequences;
      row["threshold"] = s.proportion.threshold;
      row["lenient_threshold"] = s.proportion.lenient_threshold;
      row["proportion_pass"] = s.proportion.pass;
      row["uniformity_p"] = std::round(s.uniformity->p_value * 1e6) / 1e6;
      row["uniformity_pass"] = s.uniformity->pass;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qrng::sts22
