#pragma once

// Dense statevector simulation primitives and device metadata.
//
// Basis convention: qubit 0 is the least significant bit of the basis index, so
// X on qubit k of |0...0> yields basis index 2^k. Global phase is never tracked.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qrng/rng.hpp"

namespace qrng {

using Amplitude = std::complex<double>;
using QubitId = std::uint32_t;

inline constexpr std::size_t kMaxQubits = 8;

enum class GateKind { rx, ry, cz, h, x, cx };

std::string_view gate_name(GateKind kind);
bool is_native(GateKind kind);
bool is_two_qubit(GateKind kind);

/// A gate bound to its target qubit(s). For CZ/CX, `q0` is the control and `q1`
/// the target; single-qubit gates ignore `q1`. `theta` is only meaningful for Rx/Ry.
struct Gate {
  GateKind kind;
  double theta = 0.0;
  QubitId q0 = 0;
  QubitId q1 = 0;

  static Gate rx(double theta, QubitId q) { return {GateKind::rx, theta, q, 0}; }
  static Gate ry(double theta, QubitId q) { return {GateKind::ry, theta, q, 0}; }
  static Gate h(QubitId q) { return {GateKind::h, 0.0, q, 0}; }
  static Gate x(QubitId q) { return {GateKind::x, 0.0, q, 0}; }
  static Gate cz(QubitId a, QubitId b) { return {GateKind::cz, 0.0, a, b}; }
  static Gate cx(QubitId control, QubitId target) { return {GateKind::cx, 0.0, control, target}; }

  friend bool operator==(const Gate&, const Gate&) = default;
};

struct Measure {
  std::vector<QubitId> qubits;
  friend bool operator==(const Measure&, const Measure&) = default;
};

using Op = std::variant<Gate, Measure>;

/// Row-major dense complex matrix; only used for small unitaries (<= 2^kMaxQubits).
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}
  Matrix(std::size_t dim, std::vector<Amplitude> row_major);

  static Matrix identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  Amplitude& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  const Amplitude& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

  Matrix adjoint() const;
  friend Matrix operator*(const Matrix& a, const Matrix& b);

 private:
  std::size_t dim_ = 0;
  std::vector<Amplitude> data_;
};

/// 2x2 matrix for single-qubit kinds, 4x4 for two-qubit kinds. The 4x4 local
/// basis index is bit(q0) | bit(q1) << 1.
Matrix gate_matrix(GateKind kind, double theta = 0.0);

/// True iff some phase phi gives max |U - e^{i phi} V| <= tol. phi is taken from
/// the largest-magnitude entry of V.
bool equal_up_to_global_phase(const Matrix& u, const Matrix& v, double tol);

class StateVector {
 public:
  /// |0...0> on `n_qubits` qubits.
  explicit StateVector(std::size_t n_qubits);

  static StateVector basis(std::size_t n_qubits, std::size_t index);
  /// Validates length 2^n and unit norm within 1e-10.
  static StateVector from_amplitudes(std::size_t n_qubits, std::vector<Amplitude> amplitudes);

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t size() const noexcept { return amps_.size(); }
  std::span<const Amplitude> amplitudes() const noexcept { return amps_; }
  const Amplitude& operator[](std::size_t index) const { return amps_[index]; }

  double norm_squared() const noexcept;
  double probability(std::size_t index) const { return std::norm(amps_[index]); }
  std::vector<double> probabilities() const;

  /// In-place unitary evolution; the free function apply_gate is the value form.
  void apply(const Gate& gate);
  void apply_pauli(int pauli, QubitId q);  // 1 = X, 2 = Y, 3 = Z

  /// Marginal outcome distribution over `qubits`; outcome bit j is qubits[j].
  std::vector<double> marginal(std::span<const QubitId> qubits) const;
  /// Projects `qubits` onto `outcome` (bit j <-> qubits[j]) and renormalizes.
  /// Throws if the projected norm is zero.
  void collapse(std::span<const QubitId> qubits, std::uint64_t outcome);

 private:
  void check_target(QubitId q) const;

  std::size_t n_qubits_;
  std::vector<Amplitude> amps_;
};

StateVector apply_gate(StateVector state, const Gate& gate);

struct MeasureResult {
  std::vector<std::uint8_t> bits;  // bits[j] is the outcome of qubits[j]
  StateVector state;
};

/// Born-rule measurement of distinct `qubits`, consuming one uniform from `rng`.
MeasureResult measure(const StateVector& state, std::span<const QubitId> qubits, StreamRng& rng);

/// Ordered list of gate / measurement operations.
class Circuit {
 public:
  Circuit(std::size_t n_qubits, std::vector<Op> ops, bool native_only);

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  const std::vector<Op>& ops() const noexcept { return ops_; }
  bool native_only() const noexcept { return native_only_; }

  std::size_t gate_count() const;
  std::vector<Measure> measurements() const;

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  std::size_t n_qubits_;
  std::vector<Op> ops_;
  bool native_only_;
};

/// Unitary of all gates in order, measurements skipped.
Matrix circuit_unitary(const Circuit& circuit);

/// Deterministic state reached by all gates of `circuit`, measurements skipped.
StateVector ideal_state(const Circuit& circuit);

/// Coupling map.
class Topology {
 public:
  Topology(std::size_t n_qubits, std::vector<std::pair<QubitId, QubitId>> edges,
           std::optional<QubitId> hub = std::nullopt);

  /// The 5-qubit star: hub 2 coupled to 0, 1, 3, 4.
  static Topology spark();

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  const std::vector<std::pair<QubitId, QubitId>>& edges() const noexcept { return edges_; }
  std::optional<QubitId> hub() const noexcept { return hub_; }
  bool has_edge(QubitId a, QubitId b) const;
  std::vector<QubitId> neighbors(QubitId q) const;

 private:
  std::size_t n_qubits_;
  std::vector<std::pair<QubitId, QubitId>> edges_;  // normalized (min, max), sorted
  std::optional<QubitId> hub_;
};

struct QubitCalibration {
  double p01 = 0.0;  // Pr(report 0 | true 1)
  double p10 = 0.0;  // Pr(report 1 | true 0)
  double f_1q = 1.0;
  double f_2q = 1.0;
  double t1_ms = 1.0;
  double t2_ms = 1.0;
};

/// Per-qubit readout and gate calibration. T1/T2 are carried for reporting only.
class CalibrationSnapshot {
 public:
  CalibrationSnapshot() = default;
  explicit CalibrationSnapshot(std::vector<QubitCalibration> qubits);

  std::size_t size() const noexcept { return qubits_.size(); }
  const QubitCalibration& at(QubitId q) const;
  const std::vector<QubitCalibration>& qubits() const noexcept { return qubits_; }

  /// Parses the calibration document: {"qubits": [{"p01":..,"p10":..,"f_1q":..,
  /// "f_2q":..,"t1_ms":..,"t2_ms":..}, ...]} with one record per qubit, in qubit order.
  static CalibrationSnapshot parse(const std::string& text);
  static CalibrationSnapshot load(const std::string& path);
  std::string to_text() const;

 private:
  std::vector<QubitCalibration> qubits_;
};

}  // namespace qrng
