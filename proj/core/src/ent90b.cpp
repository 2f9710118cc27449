#include "qrng/ent90b.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "qrng/error.hpp"
#include "suffix_array.hpp"

namespace qrng::ent90b {

namespace {

using Bits = std::span<const std::uint8_t>;

double clamp_h(double h) { return std::clamp(h, 0.0, 1.0) + 0.0; }

double upper_bound(double p, std::size_t n) {
  return std::min(1.0, p + kZ * std::sqrt(p * (1.0 - p) / static_cast<double>(n - 1)));
}

std::optional<double> mcv(Bits s) {
  if (s.size() < 2) return std::nullopt;
  const auto ones = static_cast<double>(std::count(s.begin(), s.end(), std::uint8_t{1}));
  const double n = static_cast<double>(s.size());
  const double p = std::max(ones, n - ones) / n;
  return clamp_h(-std::log2(upper_bound(p, s.size())));
}

std::optional<double> collision(Bits s) {
  const std::size_t n = s.size();
  std::vector<double> t;
  std::size_t i = 0;
  while (i + 1 < n) {
    if (s[i] == s[i + 1]) {
      t.push_back(2.0);
      i += 2;
    } else if (i + 2 < n) {
      t.push_back(3.0);
      i += 3;
    } else {
      break;
    }
  }
  if (t.size() < 2) return std::nullopt;
  const double v = static_cast<double>(t.size());
  double mean = 0.0;
  for (double x : t) mean += x;
  mean /= v;
  double ss = 0.0;
  for (double x : t) ss += (x - mean) * (x - mean);
  const double sigma = std::sqrt(ss / (v - 1.0));
  const double lower = mean - kZ * sigma / std::sqrt(v);
  return clamp_h(-std::log2(collision_probability(lower)));
}

std::optional<double> markov(Bits s) {
  const std::size_t n = s.size();
  if (n < 2) return std::nullopt;
  double c[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i + 1 < n; ++i) c[s[i]][s[i + 1]] += 1.0;
  const double ones = static_cast<double>(std::count(s.begin(), s.end(), std::uint8_t{1}));
  const double p0 = 1.0 - ones / static_cast<double>(n);
  const double p1 = ones / static_cast<double>(n);
  auto trans = [&](int a, int b) {
    const double row = c[a][0] + c[a][1];
    return row > 0.0 ? c[a][b] / row : 0.0;
  };
  auto lg = [](double x) { return x > 0.0 ? std::log2(x) : -std::numeric_limits<double>::infinity(); };
  const double l00 = lg(trans(0, 0)), l01 = lg(trans(0, 1)), l10 = lg(trans(1, 0)), l11 = lg(trans(1, 1));
  const double candidates[] = {
      lg(p0) + 127 * l00,            // 00...0
      lg(p0) + 64 * l01 + 63 * l10,  // 0101...
      lg(p0) + l01 + 126 * l11,      // 011...1
      lg(p1) + l10 + 126 * l00,      // 100...0
      lg(p1) + 64 * l10 + 63 * l01,  // 1010...
      lg(p1) + 127 * l11,            // 11...1
  };
  const double log_pmax = *std::max_element(std::begin(candidates), std::end(candidates));
  return clamp_h(std::min(-log_pmax / 128.0, 1.0));
}

std::optional<double> compression(Bits s) {
  constexpr std::size_t b = 6, d = 1000;
  constexpr double c = 0.5907;
  const std::size_t blocks = s.size() / b;
  if (blocks <= d + 1) return std::nullopt;
  const std::size_t v = blocks - d;
  std::vector<std::size_t> last(std::size_t{1} << b, 0);
  auto block = [&](std::size_t i) {  // 1-based
    std::size_t x = 0;
    for (std::size_t j = 0; j < b; ++j) x = (x << 1) | s[(i - 1) * b + j];
    return x;
  };
  for (std::size_t i = 1; i <= d; ++i) last[block(i)] = i;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = d + 1; i <= blocks; ++i) {
    const std::size_t x = block(i);
    const double dist = static_cast<double>(last[x] ? i - last[x] : i);
    last[x] = i;
    const double l = std::log2(dist);
    sum += l;
    sum_sq += l * l;
  }
  const double vd = static_cast<double>(v);
  const double mean = sum / vd;
  const double sigma = c * std::sqrt(std::max(0.0, sum_sq / (vd - 1.0) - mean * mean));
  const double target = mean - kZ * sigma / std::sqrt(vd);

  // G(z) = (1/v) sum_{t=d+1}^{L} sum_{u=1}^{t} F(z,t,u), with the double sum
  // reordered by u so one pass over u suffices.
  const std::size_t big_l = blocks;
  std::vector<double> log2u(big_l + 1, 0.0);
  for (std::size_t u = 2; u <= big_l; ++u) log2u[u] = std::log2(static_cast<double>(u));
  auto g = [&](double z) {
    if (z <= 0.0) return 0.0;
    double total = 0.0;
    double pw = 1.0;  // (1-z)^(u-1)
    for (std::size_t u = 1; u <= big_l && pw > 0.0; ++u) {
      // u < t terms: t in [max(u+1, d+1), L]
      const std::size_t t_lo = std::max(u + 1, d + 1);
      const double count = t_lo <= big_l ? static_cast<double>(big_l - t_lo + 1) : 0.0;
      total += z * z * pw * log2u[u] * count;
      // u == t term
      if (u >= d + 1) total += z * pw * log2u[u];
      pw *= 1.0 - z;
    }
    return total / vd;
  };
  const double k = static_cast<double>(std::size_t{1} << b);
  auto expected = [&](double p) { return g(p) + (k - 1.0) * g((1.0 - p) / (k - 1.0)); };
  double p;
  if (target >= expected(1.0 / k)) {
    p = 1.0 / k;
  } else {
    double lo = 1.0 / k, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (expected(mid) > target) lo = mid;
      else hi = mid;
    }
    p = 0.5 * (lo + hi);
  }
  return clamp_h(-std::log2(p) / static_cast<double>(b));
}

std::optional<double> t_tuple(const detail::RepeatProfile& prof, std::size_t n) {
  std::size_t t = 0;
  while (t + 1 < prof.max_count.size() && prof.max_count[t + 1] >= 35) ++t;
  if (t == 0) return std::nullopt;
  double pmax = 0.0;
  for (std::size_t i = 1; i <= t; ++i) {
    const double p = static_cast<double>(prof.max_count[i]) / static_cast<double>(n - i + 1);
    pmax = std::max(pmax, std::pow(p, 1.0 / static_cast<double>(i)));
  }
  return clamp_h(-std::log2(upper_bound(pmax, n)));
}

std::optional<double> lrs(const detail::RepeatProfile& prof, std::size_t n) {
  std::size_t u = 1;
  while (u < prof.max_count.size() && prof.max_count[u] >= 35) ++u;
  const std::size_t v = prof.pairs.empty() ? 0 : prof.pairs.size() - 1;  // longest repeated length
  if (u > v) return std::nullopt;
  double pmax = 0.0;
  for (std::size_t w = u; w <= v; ++w) {
    const double windows = static_cast<double>(n - w + 1);
    const double p = static_cast<double>(prof.pairs[w]) / (windows * (windows - 1.0) / 2.0);
    pmax = std::max(pmax, std::pow(p, 1.0 / static_cast<double>(w)));
  }
  return clamp_h(-std::log2(upper_bound(pmax, n)));
}

/// Shared tail of the four prediction estimators.
double prediction_entropy(const std::vector<std::uint8_t>& correct) {
  const std::size_t n = correct.size();
  std::size_t hits = 0, run = 0, longest = 0;
  for (auto c : correct) {
    hits += c;
    run = c ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nd;
  double p_global;
  if (hits == 0) {
    p_global = 1.0 - std::pow(0.01, 1.0 / nd);
  } else {
    p_global = std::min(1.0, p + kZ * std::sqrt(p * (1.0 - p) / (nd - 1.0)));
  }
  const double p_local = local_prediction_probability(n, longest + 1);
  return clamp_h(-std::log2(std::max({p_global, p_local, 0.5})));
}

/// Scoreboard step shared by the multi-predictor estimators; -1 = no prediction.
void update_scoreboard(std::span<const int> sub, std::uint8_t actual, std::vector<std::size_t>& score,
                       std::size_t& winner) {
  for (std::size_t j = 0; j < sub.size(); ++j) {
    if (sub[j] == actual) {
      ++score[j];
      if (score[j] >= score[winner]) winner = j;
    }
  }
}

std::optional<double> multi_mcw(Bits s) {
  constexpr std::array<std::size_t, 4> w = {63, 255, 1023, 4095};
  const std::size_t n = s.size();
  if (n <= w[0] + 1) return std::nullopt;
  std::array<std::size_t, 4> ones{};  // ones in the trailing window of each size
  std::vector<std::size_t> score(4, 0);
  std::size_t winner = 0;
  std::vector<std::uint8_t> correct;
  correct.reserve(n - w[0]);
  std::array<int, 4> sub{};
  for (std::size_t i = 0; i < n; ++i) {
    // Window j covers s[i-w_j .. i-1].
    if (i >= w[0]) {
      for (std::size_t j = 0; j < 4; ++j) {
        if (i < w[j]) {
          sub[j] = -1;
          continue;
        }
        const std::size_t zeros = w[j] - ones[j];
        sub[j] = ones[j] > zeros ? 1 : 0;  // window sizes are odd: no ties
      }
      correct.push_back(sub[winner] == s[i]);
      update_scoreboard(sub, s[i], score, winner);
    }
    for (std::size_t j = 0; j < 4; ++j) {
      ones[j] += s[i];
      if (i >= w[j]) ones[j] -= s[i - w[j]];
    }
  }
  return prediction_entropy(correct);
}

std::optional<double> lag_prediction(Bits s) {
  constexpr std::size_t d = 128;
  const std::size_t n = s.size();
  if (n < 3) return std::nullopt;
  std::vector<std::size_t> score(d, 0);
  std::size_t winner = 0;
  std::vector<std::uint8_t> correct;
  correct.reserve(n - 1);
  std::vector<int> sub(d);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) sub[j] = i >= j + 1 ? s[i - j - 1] : -1;
    correct.push_back(sub[winner] == s[i]);
    update_scoreboard(sub, s[i], score, winner);
  }
  return prediction_entropy(correct);
}

std::optional<double> multi_mmc(Bits s) {
  constexpr std::size_t depth = 16;
  const std::size_t n = s.size();
  if (n < 4) return std::nullopt;
  // counts[d-1][context][next]
  std::vector<std::vector<std::array<std::uint32_t, 2>>> counts(depth);
  for (std::size_t d = 1; d <= depth; ++d) counts[d - 1].assign(std::size_t{1} << d, {0, 0});
  std::vector<std::size_t> score(depth, 0);
  std::size_t winner = 0;
  std::vector<std::uint8_t> correct;
  correct.reserve(n - 2);
  std::vector<int> sub(depth);
  // Rolling history: the low d bits are the last d symbols, oldest most significant.
  std::uint64_t before = s[0];          // ends at i-2
  std::uint64_t latest = (before << 1) | s[1];  // ends at i-1
  auto mask = [](std::size_t d) { return (std::uint64_t{1} << d) - 1; };
  for (std::size_t i = 2; i < n; ++i) {
    for (std::size_t d = 1; d <= depth; ++d) {
      if (i >= d + 1) ++counts[d - 1][before & mask(d)][s[i - 1]];
    }
    for (std::size_t d = 1; d <= depth; ++d) {
      sub[d - 1] = -1;
      if (i < d) continue;
      const auto& c = counts[d - 1][latest & mask(d)];
      if (c[0] + c[1] == 0) continue;
      sub[d - 1] = c[1] > c[0] ? 1 : 0;
    }
    correct.push_back(sub[winner] == s[i]);
    update_scoreboard(sub, s[i], score, winner);
    before = latest;
    latest = (latest << 1) | s[i];
  }
  return prediction_entropy(correct);
}

std::optional<double> lz78y(Bits s) {
  constexpr std::size_t b = 16;
  constexpr std::size_t max_dict = 65536;
  const std::size_t n = s.size();
  if (n < b + 3) return std::nullopt;
  std::vector<std::vector<std::array<std::uint32_t, 2>>> dict(b);
  std::vector<std::vector<std::uint8_t>> present(b);
  for (std::size_t j = 1; j <= b; ++j) {
    dict[j - 1].assign(std::size_t{1} << j, {0, 0});
    present[j - 1].assign(std::size_t{1} << j, 0);
  }
  std::size_t dict_size = 0;
  std::vector<std::uint8_t> correct;
  correct.reserve(n - b - 1);
  auto mask = [](std::size_t d) { return (std::uint64_t{1} << d) - 1; };
  std::uint64_t before = 0, latest = 0;  // histories ending at i-2 and i-1
  for (std::size_t k = 0; k <= b; ++k) {
    before = latest;
    latest = (latest << 1) | s[k];
  }
  // 0-based i runs over positions b+1 .. n-1.
  for (std::size_t i = b + 1; i < n; ++i) {
    for (std::size_t j = b; j >= 1; --j) {
      const std::size_t ctx = before & mask(j);
      if (!present[j - 1][ctx] && dict_size < max_dict) {
        present[j - 1][ctx] = 1;
        ++dict_size;
      }
      if (present[j - 1][ctx]) ++dict[j - 1][ctx][s[i - 1]];
    }
    int prediction = -1;
    std::uint32_t max_count = 0;
    for (std::size_t j = b; j >= 1; --j) {
      const std::size_t ctx = latest & mask(j);
      if (!present[j - 1][ctx]) continue;
      const auto& c = dict[j - 1][ctx];
      const int y = c[1] > c[0] ? 1 : 0;
      if (c[y] > max_count) {
        prediction = y;
        max_count = c[y];
      }
    }
    correct.push_back(prediction == s[i]);
    before = latest;
    latest = (latest << 1) | s[i];
  }
  return prediction_entropy(correct);
}

std::optional<double> run_one(Estimator e, Bits s, const detail::RepeatProfile* prof) {
  switch (e) {
    case Estimator::mcv: return mcv(s);
    case Estimator::collision: return collision(s);
    case Estimator::markov: return markov(s);
    case Estimator::compression: return compression(s);
    case Estimator::t_tuple: return t_tuple(prof ? *prof : detail::repeat_profile(s), s.size());
    case Estimator::lrs: return lrs(prof ? *prof : detail::repeat_profile(s), s.size());
    case Estimator::multi_mcw: return multi_mcw(s);
    case Estimator::lag_prediction: return lag_prediction(s);
    case Estimator::multi_mmc: return multi_mmc(s);
    case Estimator::lz78y: return lz78y(s);
  }
  return std::nullopt;
}

}  // namespace

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::mcv: return "MCV";
    case Estimator::collision: return "Collision";
    case Estimator::markov: return "Markov";
    case Estimator::compression: return "Compression";
    case Estimator::t_tuple: return "TTuple";
    case Estimator::lrs: return "LRS";
    case Estimator::multi_mcw: return "MultiMCW";
    case Estimator::lag_prediction: return "LagPrediction";
    case Estimator::multi_mmc: return "MultiMMC";
    case Estimator::lz78y: return "LZ78Y";
  }
  return "?";
}

std::string_view estimator_abbrev(Estimator e) {
  switch (e) {
    case Estimator::mcv: return "MCV";
    case Estimator::collision: return "ClT";
    case Estimator::markov: return "MrT";
    case Estimator::compression: return "CmT";
    case Estimator::t_tuple: return "TTT";
    case Estimator::lrs: return "LRS";
    case Estimator::multi_mcw: return "MMCWT";
    case Estimator::lag_prediction: return "LPT";
    case Estimator::multi_mmc: return "MMMCT";
    case Estimator::lz78y: return "LZ78Y";
  }
  return "?";
}

Estimator parse_estimator(std::string_view text) {
  for (Estimator e : kEstimators)
    if (estimator_name(e) == text || estimator_abbrev(e) == text) return e;
  throw Error(Errc::invalid_argument, "unknown estimator '" + std::string(text) + "'");
}

double collision_probability(double mean_lower_bound) {
  // Binary case: E[t] = 2 + 2p(1-p), so p = 1/2 + sqrt(5/4 - mean/2).
  if (mean_lower_bound >= 2.5) return 0.5;
  return std::min(1.0, 0.5 + std::sqrt(1.25 - 0.5 * mean_lower_bound));
}

double local_prediction_probability(std::size_t n, std::size_t longest_run) {
  const double r = static_cast<double>(longest_run);
  const double big_n = static_cast<double>(n);
  // Probability that no run of r successes occurs in n trials with success probability p.
  auto log_no_run = [&](double p) {
    const double q = 1.0 - p;
    double x = 1.0;
    for (int i = 0; i < 10; ++i) x = 1.0 + q * std::pow(p, r) * std::pow(x, r + 1.0);
    const double num = 1.0 - p * x;
    const double den = (r + 1.0 - r * x) * q;
    if (num <= 0.0 || den <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(num) - std::log(den) - (big_n + 1.0) * std::log(x);
  };
  const double target = std::log(0.99);
  double lo = 0.0, hi = 1.0 - 1e-15;
  if (log_no_run(hi) > target) return hi;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_no_run(mid) > target) lo = mid;
    else hi = mid;
  }
  return lo;
}

std::optional<double> estimate(Estimator e, const BitStream& stream) {
  if (stream.empty()) throw Error(Errc::invalid_argument, "entropy estimation needs a nonempty stream");
  return run_one(e, stream.bits(), nullptr);
}

EntropyReport min_entropy(const BitStream& stream) {
  if (stream.empty()) throw Error(Errc::invalid_argument, "entropy estimation needs a nonempty stream");
  const Bits s = stream.bits();
  EntropyReport report;
  report.n = s.size();
  report.below_recommended = s.size() < kRecommendedLength;
  const detail::RepeatProfile prof = detail::repeat_profile(s);
  if (std::thread::hardware_concurrency() > 1) {
    std::vector<std::future<std::optional<double>>> jobs;
    for (Estimator e : kEstimators) jobs.push_back(std::async(std::launch::async, [&, e] { return run_one(e, s, &prof); }));
    for (std::size_t i = 0; i < jobs.size(); ++i) report.h[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < kEstimators.size(); ++i) report.h[i] = run_one(kEstimators[i], s, &prof);
  }
  std::optional<double> lowest;
  for (const auto& h : report.h)
    if (h && (!lowest || *h < *lowest)) lowest = h;
  if (!lowest) throw Error(Errc::invalid_argument, "no estimator applies to a stream of this length");
  report.min_entropy = report.h_original = report.h_assessed = *lowest;
  return report;
}

nlohmann::json to_json(const EntropyReport& report) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < kEstimators.size(); ++i) {
    const auto key = std::string(estimator_abbrev(kEstimators[i]));
    j[key] = report.h[i] ? nlohmann::json(*report.h[i]) : nlohmann::json("NA");
  }
  j["hAs"] = report.h_assessed;
  j["hOr"] = report.h_original;
  j["minE"] = report.min_entropy;
  return j;
}

}  // namespace qrng::ent90b
