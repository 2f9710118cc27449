#include "qrng/simnoise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "qrng/error.hpp"

namespace qrng {

namespace {

/// Index of the first cumulative bin exceeding u * total.
std::size_t sample_index(const std::vector<double>& cdf, double u) {
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  std::size_t k = it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
  // Never land on a zero-probability bin through rounding at the top end.
  while (k > 0 && cdf[k] == cdf[k - 1]) --k;
  return k;
}

std::vector<double> cumulative(const std::vector<double>& probs) {
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  return cdf;
}

Gate with_angle_error(Gate g, const NoiseProfile& noise) {
  if (g.kind == GateKind::rx) g.theta += noise.rx_angle_error;
  if (g.kind == GateKind::ry) g.theta += noise.ry_angle_error;
  return g;
}

std::uint8_t read_out(std::uint8_t truth, const ReadoutError& e, double u) {
  if (truth) return u < e.p01 ? 0 : 1;
  return u < e.p10 ? 1 : 0;
}

class ShotSimulator {
 public:
  ShotSimulator(const Circuit& circuit, const NoiseProfile& noise, std::uint64_t seed)
      : circuit_(circuit), noise_(noise), seed_(seed), prefix_state_(circuit.n_qubits()) {
    const auto& ops = circuit.ops();
    prefix_end_ = 0;
    while (prefix_end_ < ops.size()) {
      const auto* g = std::get_if<Gate>(&ops[prefix_end_]);
      if (!g || noise.has_gate_noise()) break;
      prefix_state_.apply(with_angle_error(*g, noise));
      ++prefix_end_;
    }
    // A single terminal measurement with a deterministic pre-measurement state
    // can be sampled from a precomputed distribution.
    if (prefix_end_ + 1 == ops.size()) {
      const auto& m = std::get<Measure>(ops.back());
      terminal_cdf_ = cumulative(prefix_state_.marginal(m.qubits));
    }
  }

  void run_shot(std::size_t shot, std::span<std::uint8_t> record) const {
    StreamRng rng(seed_, shot);
    std::size_t pos = 0;
    if (!terminal_cdf_.empty()) {
      const auto& m = std::get<Measure>(circuit_.ops().back());
      const std::size_t outcome = sample_index(terminal_cdf_, rng.uniform());
      emit(m, outcome, rng, record, pos);
      return;
    }
    StateVector state = prefix_state_;
    const auto& ops = circuit_.ops();
    for (std::size_t i = prefix_end_; i < ops.size(); ++i) {
      if (const auto* g = std::get_if<Gate>(&ops[i])) {
        state.apply(with_angle_error(*g, noise_));
        if (noise_.has_gate_noise()) {
          depolarize(state, g->q0, rng);
          if (is_two_qubit(g->kind)) depolarize(state, g->q1, rng);
        }
        continue;
      }
      const auto& m = std::get<Measure>(ops[i]);
      const std::size_t outcome = sample_index(cumulative(state.marginal(m.qubits)), rng.uniform());
      state.collapse(m.qubits, outcome);
      emit(m, outcome, rng, record, pos);
    }
  }

 private:
  void depolarize(StateVector& state, QubitId q, StreamRng& rng) const {
    if (rng.uniform() < noise_.depolarizing_p) {
      const int pauli = 1 + static_cast<int>(rng.uniform() * 3.0);
      state.apply_pauli(std::min(pauli, 3), q);
    }
  }

  void emit(const Measure& m, std::size_t outcome, StreamRng& rng, std::span<std::uint8_t> record,
            std::size_t& pos) const {
    for (std::size_t j = 0; j < m.qubits.size(); ++j) {
      const auto truth = static_cast<std::uint8_t>((outcome >> j) & 1u);
      record[pos++] = read_out(truth, noise_.readout_for(m.qubits[j]), rng.uniform());
    }
  }

  const Circuit& circuit_;
  const NoiseProfile& noise_;
  std::uint64_t seed_;
  StateVector prefix_state_;
  std::size_t prefix_end_;
  std::vector<double> terminal_cdf_;
};

}  // namespace

NoiseProfile NoiseProfile::from_calibration(const CalibrationSnapshot& calib) {
  NoiseProfile p;
  for (const auto& q : calib.qubits()) p.readout.push_back({q.p01, q.p10});
  return p;
}

void NoiseProfile::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (const auto& r : readout)
    if (!unit(r.p01) || !unit(r.p10)) throw Error(Errc::invalid_argument, "readout probabilities must lie in [0,1]");
  if (!std::isfinite(rx_angle_error) || !std::isfinite(ry_angle_error)) {
    throw Error(Errc::invalid_argument, "gate angle error must be finite");
  }
  if (!unit(depolarizing_p)) throw Error(Errc::invalid_argument, "depolarizing probability must lie in [0,1]");
}

ShotTable::ShotTable(std::vector<Measure> events, std::size_t shots, std::vector<std::uint8_t> bits,
                     std::uint64_t seed)
    : events_(std::move(events)), shots_(shots), bits_(std::move(bits)), seed_(seed) {
  for (const auto& e : events_) qubit_order_.insert(qubit_order_.end(), e.qubits.begin(), e.qubits.end());
  if (bits_.size() != shots_ * qubit_order_.size()) {
    throw Error(Errc::invalid_argument, "shot table bit count does not match shots x record width");
  }
  for (auto b : bits_)
    if (b > 1) throw Error(Errc::invalid_argument, "shot table bits must be 0 or 1");
}

ShotTable run(const Circuit& circuit, std::size_t shots, const NoiseProfile& noise, std::uint64_t seed,
              const RunOptions& options) {
  if (!circuit.native_only()) throw Error(Errc::invalid_argument, "simulator executes native circuits only");
  if (circuit.n_qubits() > kMaxQubits) throw Error(Errc::out_of_range, "circuit exceeds simulator qubit limit");
  if (shots == 0) throw Error(Errc::invalid_argument, "shots must be >= 1");
  noise.validate();

  std::vector<Measure> events = circuit.measurements();
  std::size_t width = 0;
  for (const auto& e : events) width += e.qubits.size();
  std::vector<std::uint8_t> bits(shots * width);

  const ShotSimulator sim(circuit, noise, seed);
  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, shots));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) sim.run_shot(s, std::span(bits).subspan(s * width, width));
  };
  if (workers <= 1) {
    work(0, shots);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (shots + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(shots, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  return ShotTable(std::move(events), shots, std::move(bits), seed);
}

ShotTable run_spec(const CircuitSpec& spec, const Topology& topology, std::size_t shots, const NoiseProfile& noise,
                   std::uint64_t seed, const RunOptions& options) {
  const CircuitSpec norm = normalized(spec);
  ShotTable table = run(transpile(build(norm, topology), topology), shots, noise, seed, options);
  table.spec = norm;
  if (norm.family == Family::c3) table.source_qubit = ghz_source(norm.qubits, topology);
  return table;
}

std::vector<double> predicted_distribution(std::span<const double> ideal, const NoiseProfile& noise,
                                           std::span<const QubitId> qubits) {
  if (qubits.size() >= 32 || ideal.size() != (std::size_t{1} << qubits.size())) {
    throw Error(Errc::invalid_argument, "ideal distribution length must be 2^(number of qubits)");
  }
  const double total = std::accumulate(ideal.begin(), ideal.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw Error(Errc::invalid_argument, "ideal distribution must sum to 1");
  noise.validate();
  std::vector<double> out(ideal.begin(), ideal.end());
  for (std::size_t j = 0; j < qubits.size(); ++j) {
    const ReadoutError e = noise.readout_for(qubits[j]);
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (i & bit) continue;
      const double t0 = out[i];
      const double t1 = out[i | bit];
      out[i] = (1.0 - e.p10) * t0 + e.p01 * t1;
      out[i | bit] = e.p10 * t0 + (1.0 - e.p01) * t1;
    }
  }
  return out;
}

std::vector<std::uint64_t> outcome_histogram(const ShotTable& table) {
  if (table.events().size() != 1) {
    throw Error(Errc::invalid_argument, "outcome histogram needs a single measurement event");
  }
  const std::size_t width = table.record_width();
  if (width >= 32) throw Error(Errc::out_of_range, "record too wide for a histogram");
  std::vector<std::uint64_t> hist(std::size_t{1} << width, 0);
  for (std::size_t s = 0; s < table.shots(); ++s) {
    const auto rec = table.shot(s);
    std::size_t key = 0;
    for (std::size_t j = 0; j < width; ++j) key |= std::size_t{rec[j]} << j;
    ++hist[key];
  }
  return hist;
}

std::string dump_shot_table(const ShotTable& table) {
  std::ostringstream out;
  out << "# qubit_order:";
  for (QubitId q : table.qubit_order()) out << ' ' << q;
  out << "\n# events:";
  for (const auto& e : table.events()) {
    out << " M[";
    for (std::size_t j = 0; j < e.qubits.size(); ++j) out << (j ? " " : "") << e.qubits[j];
    out << ']';
  }
  out << "\n# shots: " << table.shots() << "\n# seed: " << table.seed() << '\n';
  if (table.spec) out << "# spec: " << spec_key(*table.spec) << '\n';
  std::string line(table.record_width(), '0');
  for (std::size_t s = 0; s < table.shots(); ++s) {
    const auto rec = table.shot(s);
    for (std::size_t j = 0; j < rec.size(); ++j) line[j] = static_cast<char>('0' + rec[j]);
    out << line << '\n';
  }
  return out.str();
}

}  // namespace qrng
