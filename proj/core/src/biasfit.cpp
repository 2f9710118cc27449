#include "qrng/biasfit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "qrng/error.hpp"
#include "qrng/simnoise.hpp"
#include "qrng/special.hpp"

namespace qrng::biasfit {

namespace {

double single_qubit_expectation(const QubitCalibration& q) { return 0.5 - (q.p01 - q.p10) / 2.0; }

const QubitCalibration& calibration_for(const CalibrationSnapshot& calib, QubitId q) {
  if (q >= calib.size()) {
    throw Error(Errc::out_of_range, "calibration has no entry for qubit " + std::to_string(q));
  }
  return calib.at(q);
}

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
};

Stats population_stats(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / n);
  return s;
}

int gate_index(GateChoice g) {
  switch (g) {
    case GateChoice::h: return 0;
    case GateChoice::rx: return 1;
    case GateChoice::ry: return 2;
  }
  return 0;
}

std::string column_name(const CircuitSpec& spec) {
  return std::string(family_name(spec.family)) + "-" + std::string(gate_choice_name(spec.gate));
}

std::string pct(std::optional<double> v, int precision = 2) {
  if (!v) return "NA";
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << *v * 100.0;
  return out.str();
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

double expected_ones_fraction(const CalibrationSnapshot& calib, const CircuitSpec& raw, const BiasOptions& options) {
  const CircuitSpec spec = normalized(raw);
  if (spec.stream_qubit && spec.family != Family::c3) {
    return single_qubit_expectation(calibration_for(calib, *spec.stream_qubit));
  }
  double sum = 0.0;
  for (QubitId q : spec.qubits) {
    const auto& c = calibration_for(calib, q);
    sum += spec.family == Family::c3 ? 0.5 * (1.0 - c.p01) + 0.5 * c.p10 : single_qubit_expectation(c);
  }
  double expected = sum / static_cast<double>(spec.qubits.size());
  if (spec.family == Family::c3 && spec.stream_qubit) {
    const auto& c = calibration_for(calib, *spec.stream_qubit);
    expected = 0.5 * (1.0 - c.p01) + 0.5 * c.p10;
  }
  if (spec.family == Family::c4 || spec.family == Family::c5) expected += options.c4_c5_increment;
  return expected;
}

FitResult chi2_fit(std::span<const std::uint64_t> observed, std::span<const double> predicted, std::uint64_t total) {
  if (observed.size() != predicted.size() || observed.empty()) {
    throw Error(Errc::invalid_argument, "observed and predicted must have the same nonzero length");
  }
  if (total == 0) throw Error(Errc::invalid_argument, "total count must be positive");
  const std::uint64_t sum = std::accumulate(observed.begin(), observed.end(), std::uint64_t{0});
  if (sum != total) throw Error(Errc::invalid_argument, "observed counts do not sum to total");
  double psum = 0.0;
  for (double p : predicted) {
    if (!(p >= 0.0)) throw Error(Errc::invalid_argument, "predicted probabilities must be nonnegative");
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-9) throw Error(Errc::invalid_argument, "predicted probabilities must sum to 1");

  struct Bin {
    double expected;
    double observed;
    bool operator<(const Bin& o) const {
      return expected != o.expected ? expected < o.expected : observed < o.observed;
    }
  };
  std::multiset<Bin> bins;
  for (std::size_t i = 0; i < observed.size(); ++i)
    bins.insert({predicted[i] * static_cast<double>(total), static_cast<double>(observed[i])});
  FitResult r;
  while (bins.size() > 1 && bins.begin()->expected < kMinExpected) {
    const Bin a = *bins.begin();
    bins.erase(bins.begin());
    const Bin b = *bins.begin();
    bins.erase(bins.begin());
    bins.insert({a.expected + b.expected, a.observed + b.observed});
    ++r.merged;
  }
  if (bins.size() < 2) throw Error(Errc::invalid_argument, "degenerate model: fewer than two bins after merging");
  for (const Bin& b : bins) r.chi2 += (b.observed - b.expected) * (b.observed - b.expected) / b.expected;
  r.bins = bins.size();
  r.dof = bins.size() - 1;
  const double a = static_cast<double>(r.dof) / 2.0;
  r.p_value = special::igamc(a, r.chi2 / 2.0);
  r.log10_p = special::log10_igamc(a, r.chi2 / 2.0);
  return r;
}

std::string format_p(const FitResult& fit, int digits) {
  double exponent = std::floor(fit.log10_p);
  double mantissa = std::pow(10.0, fit.log10_p - exponent);
  const double scale = std::pow(10.0, digits - 1);
  mantissa = std::round(mantissa * scale) / scale;
  if (mantissa >= 10.0) {
    mantissa /= 10.0;
    exponent += 1.0;
  }
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits - 1) << mantissa << 'e' << (exponent < 0 ? '-' : '+')
      << std::setw(2) << std::setfill('0') << static_cast<long long>(std::abs(exponent));
  return out.str();
}

FrequencySummary frequency_summary(const std::vector<FrequencyCell>& cells) {
  if (cells.empty()) throw Error(Errc::invalid_argument, "frequency summary needs at least one cell");
  FrequencySummary s;
  auto index_of = [](std::vector<std::string>& names, const std::string& key) {
    auto it = std::find(names.begin(), names.end(), key);
    if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
    names.push_back(key);
    return names.size() - 1;
  };
  std::vector<std::tuple<std::size_t, std::size_t, double>> placed;
  for (const auto& c : cells) placed.emplace_back(index_of(s.rows, c.row), index_of(s.columns, c.column), c.fraction);
  s.cells.assign(s.rows.size(), std::vector<std::optional<double>>(s.columns.size()));
  for (const auto& [r, c, v] : placed) {
    if (s.cells[r][c]) {
      throw Error(Errc::invalid_argument, "duplicate cell (" + s.rows[r] + ", " + s.columns[c] + ")");
    }
    s.cells[r][c] = v;
  }
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    std::vector<double> xs;
    for (const auto& v : s.cells[r])
      if (v) xs.push_back(*v);
    const Stats st = population_stats(xs);
    s.row_mean.push_back(st.mean);
    s.row_sd.push_back(st.sd);
  }
  for (std::size_t c = 0; c < s.columns.size(); ++c) {
    std::vector<double> xs;
    for (std::size_t r = 0; r < s.rows.size(); ++r)
      if (s.rows[r] != "flatten" && s.cells[r][c]) xs.push_back(*s.cells[r][c]);
    if (xs.empty()) {
      s.column_mean.emplace_back();
      s.column_sd.emplace_back();
      continue;
    }
    const Stats st = population_stats(xs);
    s.column_mean.emplace_back(st.mean);
    s.column_sd.emplace_back(st.sd);
  }
  return s;
}

std::vector<FrequencyCell> frequency_cells(const std::vector<std::pair<CircuitSpec, double>>& results) {
  // Canonical order: qubit rows ascending then flatten; columns by family then gate.
  std::map<std::pair<int, int>, std::string> column_order;
  std::map<std::pair<std::string, std::string>, double> cell;
  std::map<std::string, std::vector<double>> c2_parts;
  std::set<QubitId> qubits;
  bool has_flatten = false;
  for (const auto& [raw, fraction] : results) {
    const CircuitSpec spec = normalized(raw);
    if (spec.family == Family::c3) continue;
    const std::string col = column_name(spec);
    column_order[{static_cast<int>(spec.family), gate_index(spec.gate)}] = col;
    std::string row;
    if (spec.family == Family::c2 && !spec.stream_qubit) {
      row = "flatten";
      has_flatten = true;
    } else {
      const QubitId q = spec.stream_qubit ? *spec.stream_qubit : spec.qubits.front();
      qubits.insert(q);
      row = std::to_string(q);
      if (spec.family == Family::c2) c2_parts[col].push_back(fraction);
    }
    if (!cell.emplace(std::make_pair(row, col), fraction).second) {
      throw Error(Errc::invalid_argument, "duplicate cell (" + row + ", " + col + ")");
    }
  }
  for (const auto& [col, parts] : c2_parts) {
    if (cell.count({"flatten", col})) continue;
    cell[{"flatten", col}] = std::accumulate(parts.begin(), parts.end(), 0.0) / static_cast<double>(parts.size());
    has_flatten = true;
  }
  std::vector<std::string> rows;
  for (QubitId q : qubits) rows.push_back(std::to_string(q));
  if (has_flatten) rows.push_back("flatten");
  std::vector<FrequencyCell> out;
  for (const auto& row : rows)
    for (const auto& [key, col] : column_order) {
      auto it = cell.find({row, col});
      if (it != cell.end()) out.push_back({row, col, it->second});
    }
  return out;
}

double mean_qubit_ones(const std::vector<std::uint64_t>& histogram, std::size_t n_qubits) {
  if (n_qubits == 0 || n_qubits >= 32 || histogram.size() != (std::size_t{1} << n_qubits)) {
    throw Error(Errc::invalid_argument, "histogram length must be 2^(number of qubits)");
  }
  const std::uint64_t total = std::accumulate(histogram.begin(), histogram.end(), std::uint64_t{0});
  if (total == 0) throw Error(Errc::invalid_argument, "empty histogram");
  double ones = 0.0;
  for (std::size_t k = 0; k < histogram.size(); ++k)
    ones += static_cast<double>(histogram[k]) * std::popcount(static_cast<unsigned>(k));
  return ones / (static_cast<double>(total) * static_cast<double>(n_qubits));
}

std::vector<double> c3_predicted(const CalibrationSnapshot& calib, const std::vector<QubitId>& qubits) {
  for (QubitId q : qubits) calibration_for(calib, q);
  std::vector<double> ideal(std::size_t{1} << qubits.size(), 0.0);
  ideal.front() = 0.5;
  ideal.back() = 0.5;
  return predicted_distribution(ideal, NoiseProfile::from_calibration(calib), qubits);
}

C3Table c3_summary(const CalibrationSnapshot& calib, const std::vector<C3Observation>& observations) {
  if (observations.empty()) throw Error(Errc::invalid_argument, "C3 summary needs at least one observation");
  std::map<std::vector<QubitId>, std::size_t> row_of;
  std::vector<std::vector<std::uint64_t>> pooled;
  C3Table table;
  // Rows ordered by subset size then lexicographically, as the subsets are enumerated.
  std::vector<std::vector<QubitId>> keys;
  for (const auto& o : observations) {
    const CircuitSpec spec = normalized(o.spec);
    if (spec.family != Family::c3) throw Error(Errc::invalid_argument, "C3 summary given a non-C3 spec");
    keys.push_back(spec.qubits);
  }
  std::sort(keys.begin(), keys.end(),
            [](const auto& a, const auto& b) { return a.size() != b.size() ? a.size() < b.size() : a < b; });
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (const auto& k : keys) {
    row_of[k] = table.rows.size();
    C3Row row;
    row.qubits = k;
    CircuitSpec probe = CircuitSpec::make(Family::c3, GateChoice::h, k);
    row.expected = expected_ones_fraction(calib, probe);
    table.rows.push_back(row);
    pooled.emplace_back(std::size_t{1} << k.size(), 0);
  }
  for (const auto& o : observations) {
    const CircuitSpec spec = normalized(o.spec);
    const std::size_t r = row_of.at(spec.qubits);
    auto& slot = table.rows[r].by_gate[static_cast<std::size_t>(gate_index(spec.gate))];
    if (slot) throw Error(Errc::invalid_argument, "duplicate C3 observation for " + spec_key(spec));
    slot = mean_qubit_ones(o.histogram, spec.qubits.size());
    for (std::size_t k = 0; k < o.histogram.size(); ++k) pooled[r][k] += o.histogram[k];
  }
  std::vector<double> averages;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto& row = table.rows[r];
    std::vector<double> xs;
    for (const auto& v : row.by_gate)
      if (v) xs.push_back(*v);
    row.average = population_stats(xs).mean;
    averages.push_back(row.average);
    const std::uint64_t total = std::accumulate(pooled[r].begin(), pooled[r].end(), std::uint64_t{0});
    row.fit = chi2_fit(pooled[r], c3_predicted(calib, row.qubits), total);
  }
  for (std::size_t g = 0; g < 3; ++g) {
    std::vector<double> xs;
    for (const auto& row : table.rows)
      if (row.by_gate[g]) xs.push_back(*row.by_gate[g]);
    if (xs.empty()) continue;
    const Stats st = population_stats(xs);
    table.gate_mean[g] = st.mean;
    table.gate_sd[g] = st.sd;
  }
  const Stats st = population_stats(averages);
  table.average_mean = st.mean;
  table.average_sd = st.sd;
  return table;
}

namespace {

/// Renders rows of string cells with right-aligned, space-padded columns.
std::string align(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], r[c].size());
    }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << "  ";
      out << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(width[c])) << r[c];
    }
    out << '\n';
  }
  return out.str();
}

std::string fixed(double v, int precision) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

}  // namespace

std::string to_text(const FrequencySummary& s) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"qubits"};
  header.insert(header.end(), s.columns.begin(), s.columns.end());
  header.push_back("Avg");
  header.push_back("SD");
  rows.push_back(header);
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    std::vector<std::string> line{s.rows[r]};
    for (const auto& v : s.cells[r]) line.push_back(pct(v));
    line.push_back(pct(s.row_mean[r]));
    line.push_back(pct(s.row_sd[r]));
    rows.push_back(line);
  }
  std::vector<std::string> avg{"Avg"}, sd{"SD"};
  for (std::size_t c = 0; c < s.columns.size(); ++c) {
    avg.push_back(pct(s.column_mean[c]));
    sd.push_back(pct(s.column_sd[c]));
  }
  rows.push_back(avg);
  rows.push_back(sd);
  return align(rows);
}

std::string to_text(const C3Table& t, std::size_t n_qubits) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  for (std::size_t q = 0; q < n_qubits; ++q) header.push_back(std::to_string(q));
  for (const char* h : {"H", "Rx", "Ry", "Avg", "Ex", "chi2", "p-value"}) header.emplace_back(h);
  rows.push_back(header);
  for (const auto& row : t.rows) {
    std::vector<std::string> line;
    for (std::size_t q = 0; q < n_qubits; ++q)
      line.emplace_back(std::find(row.qubits.begin(), row.qubits.end(), q) != row.qubits.end() ? "+" : "");
    for (const auto& v : row.by_gate) line.push_back(pct(v));
    line.push_back(pct(row.average));
    line.push_back(pct(row.expected));
    line.push_back(fixed(row.fit.chi2, 0));
    line.push_back(format_p(row.fit));
    rows.push_back(line);
  }
  std::vector<std::string> avg(n_qubits, ""), sd(n_qubits, "");
  if (n_qubits) {
    avg[0] = "Avg";
    sd[0] = "SD";
  }
  for (std::size_t g = 0; g < 3; ++g) {
    avg.push_back(pct(t.gate_mean[g]));
    sd.push_back(pct(t.gate_sd[g]));
  }
  avg.push_back(pct(t.average_mean));
  sd.push_back(pct(t.average_sd));
  rows.push_back(avg);
  rows.push_back(sd);
  return align(rows);
}

nlohmann::json to_json(const FitResult& fit) {
  return {{"chi2", fit.chi2}, {"dof", fit.dof}, {"p_value", fit.p_value}, {"log10_p", fit.log10_p},
          {"p_text", format_p(fit)}, {"bins", fit.bins}, {"merged", fit.merged}};
}

nlohmann::json to_json(const FrequencySummary& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    nlohmann::json cells = nlohmann::json::object();
    for (std::size_t c = 0; c < s.columns.size(); ++c) cells[s.columns[c]] = opt(s.cells[r][c]);
    rows.push_back({{"row", s.rows[r]}, {"cells", cells}, {"avg", s.row_mean[r]}, {"sd", s.row_sd[r]}});
  }
  nlohmann::json avg = nlohmann::json::object(), sd = nlohmann::json::object();
  for (std::size_t c = 0; c < s.columns.size(); ++c) {
    avg[s.columns[c]] = opt(s.column_mean[c]);
    sd[s.columns[c]] = opt(s.column_sd[c]);
  }
  return {{"columns", s.columns}, {"rows", rows}, {"column_avg", avg}, {"column_sd", sd}};
}

nlohmann::json to_json(const C3Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    rows.push_back({{"qubits", row.qubits},
                    {"H", opt(row.by_gate[0])},
                    {"Rx", opt(row.by_gate[1])},
                    {"Ry", opt(row.by_gate[2])},
                    {"avg", row.average},
                    {"expected", row.expected},
                    {"fit", to_json(row.fit)}});
  }
  return {{"rows", rows},
          {"gate_avg", {{"H", opt(t.gate_mean[0])}, {"Rx", opt(t.gate_mean[1])}, {"Ry", opt(t.gate_mean[2])}}},
          {"gate_sd", {{"H", opt(t.gate_sd[0])}, {"Rx", opt(t.gate_sd[1])}, {"Ry", opt(t.gate_sd[2])}}},
          {"avg_mean", t.average_mean},
          {"avg_sd", t.average_sd}};
}

}  // namespace qrng::biasfit
