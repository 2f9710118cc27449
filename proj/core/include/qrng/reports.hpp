#pragma once

// Grid-level heatmap data: one row per stream, one column per subtest or estimator.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/ent90b.hpp"
#include "qrng/sts22.hpp"

namespace qrng {

struct HeatmapTable {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> values;  // NotApplicable = nullopt

  /// Tab-separated, header row first, "NA" for missing cells, 6 decimals.
  std::string to_tsv() const;
  nlohmann::json to_json() const;
};

/// Columns are subtest labels in battery order ("Frq", "BF", "CS-1", ..., "LC").
HeatmapTable sts22_heatmap(const std::vector<std::pair<std::string, sts22::Sts22Report>>& reports);

/// Columns MCV ... LZ78Y, hAs, hOr, minE.
HeatmapTable ent90b_heatmap(const std::vector<std::pair<std::string, ent90b::EntropyReport>>& reports);

/// Aligned text rendering of an sts22 report: label, p-value, PASS/FAIL at alpha.
std::string sts22_text(const sts22::Sts22Report& report, double alpha = 0.01);
std::string sts22_summary_text(const std::vector<sts22::SubtestSummary>& summary);
std::string ent90b_text(const ent90b::EntropyReport& report);

}  // namespace qrng
