#pragma once

// Shot-based noisy execution of native circuits and exact noisy outcome
// distributions.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrng/families.hpp"
#include "qrng/qcore.hpp"

namespace qrng {

struct ReadoutError {
  double p01 = 0.0;  // Pr(report 0 | true 1)
  double p10 = 0.0;  // Pr(report 1 | true 0)
};

/// Readout confusion per qubit plus optional coherent over-rotation and
/// single-qubit depolarizing noise after each gate.
struct NoiseProfile {
  std::vector<ReadoutError> readout;  // indexed by qubit; missing entries are ideal
  double rx_angle_error = 0.0;        // added to every Rx angle (radians)
  double ry_angle_error = 0.0;        // added to every Ry angle (radians)
  double depolarizing_p = 0.0;        // per gate per touched qubit

  static NoiseProfile ideal() { return {}; }
  /// Readout confusion taken from the snapshot; gate noise off.
  static NoiseProfile from_calibration(const CalibrationSnapshot& calib);

  ReadoutError readout_for(QubitId q) const { return q < readout.size() ? readout[q] : ReadoutError{}; }
  bool has_gate_noise() const { return depolarizing_p > 0.0; }
  void validate() const;
};

/// Per-shot measurement records. Each shot's record is the concatenation of its
/// measurement events in time order; `qubit_order[k]` labels bit k of a record.
class ShotTable {
 public:
  ShotTable() = default;
  ShotTable(std::vector<Measure> events, std::size_t shots, std::vector<std::uint8_t> bits, std::uint64_t seed);

  const std::vector<Measure>& events() const noexcept { return events_; }
  const std::vector<QubitId>& qubit_order() const noexcept { return qubit_order_; }
  std::size_t shots() const noexcept { return shots_; }
  std::size_t record_width() const noexcept { return qubit_order_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const std::uint8_t> shot(std::size_t i) const {
    return {bits_.data() + i * record_width(), record_width()};
  }
  std::span<const std::uint8_t> raw_bits() const noexcept { return bits_; }

  /// Provenance filled by callers that execute a CircuitSpec.
  std::optional<CircuitSpec> spec;
  std::optional<QubitId> source_qubit;  // GHZ source, for C3 decoding

  friend bool operator==(const ShotTable&, const ShotTable&) = default;

 private:
  std::vector<Measure> events_;
  std::vector<QubitId> qubit_order_;
  std::size_t shots_ = 0;
  std::vector<std::uint8_t> bits_;
  std::uint64_t seed_ = 0;
};

struct RunOptions {
  /// 0 = std::thread::hardware_concurrency(). Results do not depend on this value.
  unsigned workers = 0;
};

/// Executes `shots` shots of a native circuit. Shot i draws from StreamRng(seed, i)
/// only, so the table is bit-identical for a given (circuit, shots, noise, seed).
ShotTable run(const Circuit& circuit, std::size_t shots, const NoiseProfile& noise, std::uint64_t seed,
              const RunOptions& options = {});

/// Convenience: build + transpile + run, with spec and GHZ source recorded.
ShotTable run_spec(const CircuitSpec& spec, const Topology& topology, std::size_t shots, const NoiseProfile& noise,
                   std::uint64_t seed, const RunOptions& options = {});

/// Pushes an ideal outcome distribution (bit j <-> qubits[j]) through the tensor
/// product of the per-qubit confusion matrices.
std::vector<double> predicted_distribution(std::span<const double> ideal, const NoiseProfile& noise,
                                           std::span<const QubitId> qubits);

/// Histogram of full-record outcomes for a table with a single measurement event;
/// bin index bit j <-> qubit_order()[j].
std::vector<std::uint64_t> outcome_histogram(const ShotTable& table);

/// Text dump: header comment naming the qubit order, then one line per shot.
std::string dump_shot_table(const ShotTable& table);

}  // namespace qrng
