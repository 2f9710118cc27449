#include "qrng/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qrng/error.hpp"

namespace qrng {

namespace {

constexpr double kNormTolerance = 1e-10;


}  // namespace

std::string_view gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::rx: return "RX";
    case GateKind::ry: return "RY";
    case GateKind::cz: return "CZ";
    case GateKind::h: return "H";
    case GateKind::x: return "X";
    case GateKind::cx: return "CX";
  }
  return "?";
}

bool is_native(GateKind kind) {
  return kind == GateKind::rx || kind == GateKind::ry || kind == GateKind::cz;
}

bool is_two_qubit(GateKind kind) { return kind == GateKind::cz || kind == GateKind::cx; }

// --- Matrix ---------------------------------------------------------------

Matrix::Matrix(std::size_t dim, std::vector<Amplitude> row_major)
    : dim_(dim), data_(std::move(row_major)) {
  if (data_.size() != dim * dim) {
    throw Error(Errc::invalid_argument, "matrix data does not match dimension");
  }
}

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::adjoint() const {
  Matrix out(dim_);
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw Error(Errc::invalid_argument, "matrix dimension mismatch");
  const std::size_t n = a.dim();
  Matrix out(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      const Amplitude ark = a(r, k);
      if (ark == Amplitude{}) continue;
      for (std::size_t c = 0; c < n; ++c) out(r, c) += ark * b(k, c);
    }
  return out;
}

Matrix gate_matrix(GateKind kind, double theta) {
  using namespace std::complex_literals;
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  const double r = 1.0 / std::numbers::sqrt2;
  switch (kind) {
    case GateKind::rx: return Matrix(2, {c, -1i * s, -1i * s, c});
    case GateKind::ry: return Matrix(2, {c, -s, s, c});
    case GateKind::h: return Matrix(2, {r, r, r, -r});
    case GateKind::x: return Matrix(2, {0.0, 1.0, 1.0, 0.0});
    case GateKind::cz: {
      Matrix m = Matrix::identity(4);
      m(3, 3) = -1.0;
      return m;
    }
    case GateKind::cx: {
      // control = local bit 0, target = local bit 1
      Matrix m(4);
      m(0, 0) = 1.0;
      m(2, 2) = 1.0;
      m(3, 1) = 1.0;
      m(1, 3) = 1.0;
      return m;
    }
  }
  throw Error(Errc::invalid_argument, "unknown gate kind");
}

bool equal_up_to_global_phase(const Matrix& u, const Matrix& v, double tol) {
  if (u.dim() != v.dim()) throw Error(Errc::invalid_argument, "matrix dimension mismatch");
  const std::size_t n = v.dim();
  std::size_t br = 0, bc = 0;
  double best = -1.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (std::abs(v(r, c)) > best) {
        best = std::abs(v(r, c));
        br = r;
        bc = c;
      }
  if (best <= 0.0) {
    // V is zero; equal only if U is zero as well.
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        if (std::abs(u(r, c)) > tol) return false;
    return true;
  }
  const Amplitude ratio = u(br, bc) / v(br, bc);
  if (std::abs(ratio) == 0.0) return false;
  const Amplitude phase = ratio / std::abs(ratio);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (std::abs(u(r, c) - phase * v(r, c)) > tol) return false;
  return true;
}

// --- StateVector ------------------------------------------------------------

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits == 0 || n_qubits > kMaxQubits) {
    throw Error(Errc::out_of_range, "statevector supports 1.." + std::to_string(kMaxQubits) + " qubits");
  }
  amps_.assign(std::size_t{1} << n_qubits, Amplitude{});
  amps_[0] = 1.0;
}

StateVector StateVector::basis(std::size_t n_qubits, std::size_t index) {
  StateVector s(n_qubits);
  if (index >= s.size()) throw Error(Errc::out_of_range, "basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

StateVector StateVector::from_amplitudes(std::size_t n_qubits, std::vector<Amplitude> amplitudes) {
  StateVector s(n_qubits);
  if (amplitudes.size() != s.size()) {
    throw Error(Errc::invalid_argument, "amplitude vector length must be 2^n");
  }
  for (const auto& a : amplitudes)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw Error(Errc::invalid_argument, "non-finite amplitude");
  s.amps_ = std::move(amplitudes);
  if (std::abs(s.norm_squared() - 1.0) > kNormTolerance) {
    throw Error(Errc::invalid_argument, "amplitudes are not normalized");
  }
  return s;
}

double StateVector::norm_squared() const noexcept {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amps_.size());
  std::transform(amps_.begin(), amps_.end(), p.begin(), [](const Amplitude& a) { return std::norm(a); });
  return p;
}

void StateVector::check_target(QubitId q) const {
  if (q >= n_qubits_) throw Error(Errc::out_of_range, "qubit " + std::to_string(q) + " out of range");
}

void StateVector::apply(const Gate& gate) {
  check_target(gate.q0);
  if (!is_two_qubit(gate.kind)) {
    const Matrix m = gate_matrix(gate.kind, gate.theta);
    const Amplitude m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
    const std::size_t stride = std::size_t{1} << gate.q0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & stride) continue;
      const Amplitude a0 = amps_[i];
      const Amplitude a1 = amps_[i | stride];
      amps_[i] = m00 * a0 + m01 * a1;
      amps_[i | stride] = m10 * a0 + m11 * a1;
    }
    return;
  }
  check_target(gate.q1);
  if (gate.q0 == gate.q1) throw Error(Errc::invalid_argument, "two-qubit gate needs distinct targets");
  const std::size_t b0 = std::size_t{1} << gate.q0;
  const std::size_t b1 = std::size_t{1} << gate.q1;
  if (gate.kind == GateKind::cz) {
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if ((i & b0) && (i & b1)) amps_[i] = -amps_[i];
  } else {  // CX: flip target where control is set
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if ((i & b0) && !(i & b1)) std::swap(amps_[i], amps_[i | b1]);
  }
}

void StateVector::apply_pauli(int pauli, QubitId q) {
  check_target(q);
  using namespace std::complex_literals;
  const std::size_t stride = std::size_t{1} << q;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (i & stride) continue;
    Amplitude& a0 = amps_[i];
    Amplitude& a1 = amps_[i | stride];
    switch (pauli) {
      case 1: std::swap(a0, a1); break;
      case 2: {
        const Amplitude t = a0;
        a0 = -1i * a1;
        a1 = 1i * t;
        break;
      }
      case 3: a1 = -a1; break;
      default: throw Error(Errc::invalid_argument, "pauli index must be 1..3");
    }
  }
}

std::vector<double> StateVector::marginal(std::span<const QubitId> qubits) const {
  for (QubitId q : qubits) check_target(q);
  std::vector<double> out(std::size_t{1} << qubits.size(), 0.0);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    const double p = std::norm(amps_[i]);
    if (p == 0.0) continue;
    std::size_t key = 0;
    for (std::size_t j = 0; j < qubits.size(); ++j) key |= ((i >> qubits[j]) & 1u) << j;
    out[key] += p;
  }
  return out;
}

void StateVector::collapse(std::span<const QubitId> qubits, std::uint64_t outcome) {
  double kept = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < qubits.size() && match; ++j)
      match = ((i >> qubits[j]) & 1u) == ((outcome >> j) & 1u);
    if (match) {
      kept += std::norm(amps_[i]);
    } else {
      amps_[i] = 0.0;
    }
  }
  if (!(kept > 0.0)) throw Error(Errc::invalid_argument, "measurement projected onto a zero-norm state");
  const double scale = 1.0 / std::sqrt(kept);
  for (auto& a : amps_) a *= scale;
}

StateVector apply_gate(StateVector state, const Gate& gate) {
  state.apply(gate);
  return state;
}

MeasureResult measure(const StateVector& state, std::span<const QubitId> qubits, StreamRng& rng) {
  for (std::size_t i = 0; i < qubits.size(); ++i)
    for (std::size_t j = i + 1; j < qubits.size(); ++j)
      if (qubits[i] == qubits[j]) throw Error(Errc::invalid_argument, "measured qubits must be distinct");
  const double norm = state.norm_squared();
  if (!(norm > 0.0)) throw Error(Errc::invalid_argument, "cannot measure a zero-norm state");
  const std::vector<double> probs = state.marginal(qubits);
  const double u = rng.uniform() * norm;
  std::uint64_t outcome = probs.size() - 1;
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) {
      outcome = k;
      break;
    }
  }
  // Floating-point slack can land u past the last nonzero bin.
  while (probs[outcome] == 0.0 && outcome > 0) --outcome;
  MeasureResult result{std::vector<std::uint8_t>(qubits.size()), state};
  for (std::size_t j = 0; j < qubits.size(); ++j) result.bits[j] = static_cast<std::uint8_t>((outcome >> j) & 1u);
  result.state.collapse(qubits, outcome);
  return result;
}

// --- Circuit ---------------------------------------------------------------

Circuit::Circuit(std::size_t n_qubits, std::vector<Op> ops, bool native_only)
    : n_qubits_(n_qubits), ops_(std::move(ops)), native_only_(native_only) {
  if (n_qubits_ == 0) throw Error(Errc::invalid_argument, "circuit needs at least one qubit");
  bool has_measure = false;
  auto check = [&](QubitId q) {
    if (q >= n_qubits_) throw Error(Errc::out_of_range, "qubit " + std::to_string(q) + " out of range");
  };
  for (const Op& op : ops_) {
    if (const auto* g = std::get_if<Gate>(&op)) {
      check(g->q0);
      if (is_two_qubit(g->kind)) {
        check(g->q1);
        if (g->q0 == g->q1) throw Error(Errc::invalid_argument, "two-qubit gate needs distinct targets");
      }
      if (!std::isfinite(g->theta)) throw Error(Errc::invalid_argument, "gate angle must be finite");
      if (native_only_ && !is_native(g->kind)) {
        throw Error(Errc::invalid_argument, "non-native gate in native-only circuit");
      }
    } else {
      const auto& m = std::get<Measure>(op);
      if (m.qubits.empty()) throw Error(Errc::invalid_argument, "empty measurement");
      for (std::size_t i = 0; i < m.qubits.size(); ++i) {
        check(m.qubits[i]);
        for (std::size_t j = i + 1; j < m.qubits.size(); ++j)
          if (m.qubits[i] == m.qubits[j]) throw Error(Errc::invalid_argument, "measured qubits must be distinct");
      }
      has_measure = true;
    }
  }
  if (!has_measure) throw Error(Errc::invalid_argument, "circuit needs at least one measurement");
}

std::size_t Circuit::gate_count() const {
  return static_cast<std::size_t>(
      std::count_if(ops_.begin(), ops_.end(), [](const Op& op) { return std::holds_alternative<Gate>(op); }));
}

std::vector<Measure> Circuit::measurements() const {
  std::vector<Measure> out;
  for (const Op& op : ops_)
    if (const auto* m = std::get_if<Measure>(&op)) out.push_back(*m);
  return out;
}

Matrix circuit_unitary(const Circuit& circuit) {
  const std::size_t n = circuit.n_qubits();
  const std::size_t dim = std::size_t{1} << n;
  Matrix u(dim);
  for (std::size_t col = 0; col < dim; ++col) {
    StateVector s = StateVector::basis(n, col);
    for (const Op& op : circuit.ops())
      if (const auto* g = std::get_if<Gate>(&op)) s.apply(*g);
    for (std::size_t row = 0; row < dim; ++row) u(row, col) = s[row];
  }
  return u;
}

StateVector ideal_state(const Circuit& circuit) {
  StateVector s(circuit.n_qubits());
  for (const Op& op : circuit.ops())
    if (const auto* g = std::get_if<Gate>(&op)) s.apply(*g);
  return s;
}

// --- Topology --------------------------------------------------------------

Topology::Topology(std::size_t n_qubits, std::vector<std::pair<QubitId, QubitId>> edges,
                   std::optional<QubitId> hub)
    : n_qubits_(n_qubits), hub_(hub) {
  if (n_qubits == 0) throw Error(Errc::invalid_argument, "topology needs at least one qubit");
  for (auto [a, b] : edges) {
    if (a >= n_qubits || b >= n_qubits) throw Error(Errc::out_of_range, "edge references unknown qubit");
    if (a == b) throw Error(Errc::invalid_argument, "self-loop edge");
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  if (hub_ && *hub_ >= n_qubits) throw Error(Errc::out_of_range, "hub references unknown qubit");
}

Topology Topology::spark() { return Topology(5, {{0, 2}, {1, 2}, {2, 3}, {2, 4}}, QubitId{2}); }

bool Topology::has_edge(QubitId a, QubitId b) const {
  const std::pair<QubitId, QubitId> key{std::min(a, b), std::max(a, b)};
  return std::binary_search(edges_.begin(), edges_.end(), key);
}

std::vector<QubitId> Topology::neighbors(QubitId q) const {
  std::vector<QubitId> out;
  for (auto [a, b] : edges_) {
    if (a == q) out.push_back(b);
    if (b == q) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- CalibrationSnapshot ---------------------------------------------------

CalibrationSnapshot::CalibrationSnapshot(std::vector<QubitCalibration> qubits) : qubits_(std::move(qubits)) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (std::size_t q = 0; q < qubits_.size(); ++q) {
    const auto& c = qubits_[q];
    const std::string where = "qubit " + std::to_string(q) + ": ";
    if (!unit(c.p01) || !unit(c.p10)) throw Error(Errc::invalid_argument, where + "readout probabilities must lie in [0,1]");
    if (!unit(c.f_1q) || !unit(c.f_2q)) throw Error(Errc::invalid_argument, where + "fidelities must lie in [0,1]");
    if (!(c.t1_ms > 0.0) || !(c.t2_ms > 0.0)) throw Error(Errc::invalid_argument, where + "T1/T2 must be positive");
  }
}

const QubitCalibration& CalibrationSnapshot::at(QubitId q) const {
  if (q >= qubits_.size()) throw Error(Errc::out_of_range, "no calibration entry for qubit " + std::to_string(q));
  return qubits_[q];
}

CalibrationSnapshot CalibrationSnapshot::parse(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_format, std::string("calibration document: ") + e.what());
  }
  if (!doc.contains("qubits") || !doc["qubits"].is_array()) {
    throw Error(Errc::bad_format, "calibration document needs a \"qubits\" array");
  }
  std::vector<QubitCalibration> out;
  for (const auto& rec : doc["qubits"]) {
    QubitCalibration c;
    try {
      c.p01 = rec.at("p01").get<double>();
      c.p10 = rec.at("p10").get<double>();
      c.f_1q = rec.at("f_1q").get<double>();
      c.f_2q = rec.at("f_2q").get<double>();
      c.t1_ms = rec.at("t1_ms").get<double>();
      c.t2_ms = rec.at("t2_ms").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::bad_format, "calibration record " + std::to_string(out.size()) + ": " + e.what());
    }
    out.push_back(c);
  }
  return CalibrationSnapshot(std::move(out));
}

CalibrationSnapshot CalibrationSnapshot::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open calibration file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string CalibrationSnapshot::to_text() const {
  nlohmann::json doc;
  doc["qubits"] = nlohmann::json::array();
  for (const auto& c : qubits_) {
    doc["qubits"].push_back({{"p01", c.p01}, {"p10", c.p10}, {"f_1q", c.f_1q},
                             {"f_2q", c.f_2q}, {"t1_ms", c.t1_ms}, {"t2_ms", c.t2_ms}});
  }
  return doc.dump(2);
}

}  // namespace qrng
