#pragma once

// Readout-bias model: expected ones fractions under a calibration snapshot,
// chi-square fits of outcome histograms, and the per-qubit and C3 summary tables.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrng/families.hpp"
#include "qrng/qcore.hpp"

namespace qrng::biasfit {

struct BiasOptions {
  /// Added to the readout-only prediction for C4 and C5, which apply extra gates
  /// before measurement. Zero keeps the pure readout formula.
  double c4_c5_increment = 0.0;
};

/// C1/C2/C4/C5: 1/2 - (p01 - p10)/2 for the stream qubit (flattened C2: mean over
/// qubits). C3: mean over the spec qubits of (1 - p01)/2 + p10/2.
double expected_ones_fraction(const CalibrationSnapshot& calib, const CircuitSpec& spec,
                              const BiasOptions& options = {});

struct FitResult {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;    // 0 when it underflows; see log10_p
  double log10_p = 0.0;    // always finite
  std::size_t bins = 0;    // after merging
  std::size_t merged = 0;  // original bins folded into others
};

/// Expected counts below this are merged before the statistic.
inline constexpr double kMinExpected = 5.0;

/// Pearson chi-square of observed counts against predicted probabilities, with
/// dof = retained bins - 1.
FitResult chi2_fit(std::span<const std::uint64_t> observed, std::span<const double> predicted, std::uint64_t total);

/// "1.51e-343" style rendering of 10^log10_p.
std::string format_p(const FitResult& fit, int digits = 3);

struct FrequencyCell {
  std::string row;     // "0".."4" or "flatten"
  std::string column;  // "C1-H", "C2-Rx", ...
  double fraction;
};

/// Cells in row-major order with per-row and per-column mean and population SD.
/// Column statistics skip the "flatten" row.
struct FrequencySummary {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> cells;
  std::vector<double> row_mean, row_sd;
  std::vector<std::optional<double>> column_mean, column_sd;
};

FrequencySummary frequency_summary(const std::vector<FrequencyCell>& cells);

/// Maps per-spec ones fractions onto the single-qubit table layout: qubit rows, one
/// column per family and gate, plus a "flatten" row for C2 (the mean of its
/// per-qubit streams, or the flattened stream itself). C3 specs are skipped.
std::vector<FrequencyCell> frequency_cells(const std::vector<std::pair<CircuitSpec, double>>& results);

/// Outcome histogram of one C3 run; bin bit j <-> spec.qubits[j] (sorted).
struct C3Observation {
  CircuitSpec spec;
  std::vector<std::uint64_t> histogram;
};

/// Mean over the measured qubits of each qubit's ones fraction.
double mean_qubit_ones(const std::vector<std::uint64_t>& histogram, std::size_t n_qubits);

/// Ideal GHZ outcome distribution pushed through the snapshot's confusion matrices.
std::vector<double> c3_predicted(const CalibrationSnapshot& calib, const std::vector<QubitId>& qubits);

struct C3Row {
  std::vector<QubitId> qubits;
  std::array<std::optional<double>, 3> by_gate{};  // H, Rx, Ry
  double average = 0.0;
  double expected = 0.0;
  FitResult fit;  // histograms pooled across gates
};

struct C3Table {
  std::vector<C3Row> rows;
  std::array<std::optional<double>, 3> gate_mean{}, gate_sd{};
  double average_mean = 0.0, average_sd = 0.0;
};

C3Table c3_summary(const CalibrationSnapshot& calib, const std::vector<C3Observation>& observations);

std::string to_text(const FrequencySummary& summary);
std::string to_text(const C3Table& table, std::size_t n_qubits);
nlohmann::json to_json(const FrequencySummary& summary);
nlohmann::json to_json(const C3Table& table);
nlohmann::json to_json(const FitResult& fit);

}  // namespace qrng::biasfit
