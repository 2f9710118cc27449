#include "qrng/reports.hpp"

#include <iomanip>
#include <sstream>

#include "qrng/error.hpp"

namespace qrng {

namespace {

std::string fmt(std::optional<double> v, int precision = 6) {
  if (!v) return "NA";
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << *v;
  return out.str();
}

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

}  // namespace

std::string HeatmapTable::to_tsv() const {
  std::ostringstream out;
  out << "stream";
  for (const auto& c : columns) out << '\t' << c;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << rows[r];
    for (const auto& v : values[r]) out << '\t' << fmt(v);
    out << '\n';
  }
  return out.str();
}

nlohmann::json HeatmapTable::to_json() const {
  nlohmann::json out_rows = nlohmann::json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& v : values[r]) vals.push_back(v ? nlohmann::json(std::round(*v * 1e6) / 1e6) : nlohmann::json("NA"));
    out_rows.push_back({{"stream", rows[r]}, {"values", vals}});
  }
  return {{"columns", columns}, {"rows", out_rows}};
}

HeatmapTable sts22_heatmap(const std::vector<std::pair<std::string, sts22::Sts22Report>>& reports) {
  HeatmapTable t;
  if (reports.empty()) return t;
  for (const auto& r : reports.front().second.results) t.columns.push_back(sts22::subtest_label(r.family, r.index));
  for (const auto& [key, report] : reports) {
    if (report.results.size() != t.columns.size()) {
      throw Error(Errc::invalid_argument, "reports disagree on subtest layout");
    }
    t.rows.push_back(key);
    auto& row = t.values.emplace_back();
    for (const auto& r : report.results) row.push_back(r.p_value);
  }
  return t;
}

HeatmapTable ent90b_heatmap(const std::vector<std::pair<std::string, ent90b::EntropyReport>>& reports) {
  HeatmapTable t;
  for (auto e : ent90b::kEstimators) t.columns.emplace_back(ent90b::estimator_abbrev(e));
  for (const char* c : {"hAs", "hOr", "minE"}) t.columns.emplace_back(c);
  for (const auto& [key, report] : reports) {
    t.rows.push_back(key);
    auto& row = t.values.emplace_back(report.h.begin(), report.h.end());
    row.emplace_back(report.h_assessed);
    row.emplace_back(report.h_original);
    row.emplace_back(report.min_entropy);
  }
  return t;
}

std::string sts22_text(const sts22::Sts22Report& report, double alpha) {
  std::vector<std::vector<std::string>> rows{{"subtest", "p-value", "result"}};
  for (const auto& r : report.results) {
    const char* verdict = !r.p_value ? "NA" : *r.p_value >= alpha ? "PASS" : "FAIL";
    rows.push_back({sts22::subtest_label(r.family, r.index), fmt(r.p_value), verdict});
  }
  return align(rows);
}

std::string sts22_summary_text(const std::vector<sts22::SubtestSummary>& summary) {
  std::vector<std::vector<std::string>> rows{{"subtest", "passed", "threshold", "proportion", "uniformity-p", "uniform", "NA"}};
  for (const auto& s : summary) {
    std::vector<std::string> line{sts22::subtest_label(s.family, s.index)};
    if (s.uniformity) {
      line.push_back(std::to_string(s.proportion.passed) + "/" + std::to_string(s.proportion.sequences));
      line.push_back(std::to_string(s.proportion.threshold));
      line.push_back(s.proportion.pass ? "PASS" : "FAIL");
      line.push_back(fmt(s.uniformity->p_value));
      line.push_back(s.uniformity->pass ? "PASS" : "FAIL");
    } else {
      line.insert(line.end(), {"-", "-", "NA", "NA", "NA"});
    }
    line.push_back(std::to_string(s.not_applicable));
    rows.push_back(line);
  }
  return align(rows);
}

std::string ent90b_text(const ent90b::EntropyReport& report) {
  std::vector<std::vector<std::string>> rows{{"estimator", "h"}};
  for (std::size_t i = 0; i < ent90b::kEstimators.size(); ++i)
    rows.push_back({std::string(ent90b::estimator_name(ent90b::kEstimators[i])), fmt(report.h[i])});
  rows.push_back({"hAssessed", fmt(report.h_assessed)});
  rows.push_back({"hOriginal", fmt(report.h_original)});
  rows.push_back({"minEntropy", fmt(report.min_entropy)});
  return align(rows);
}

}  // namespace qrng
