#include "qrng/families.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>
#include <sstream>

#include "qrng/error.hpp"

namespace qrng {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;
constexpr double kPi = std::numbers::pi;

Gate superposition_gate(GateChoice g, QubitId q) {
  switch (g) {
    case GateChoice::h: return Gate::h(q);
    case GateChoice::rx: return Gate::rx(kHalfPi, q);
    case GateChoice::ry: return Gate::ry(kHalfPi, q);
  }
  throw Error(Errc::invalid_argument, "unknown gate choice");
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::c1: return "C1";
    case Family::c2: return "C2";
    case Family::c3: return "C3";
    case Family::c4: return "C4";
    case Family::c5: return "C5";
  }
  return "?";
}

std::string_view gate_choice_name(GateChoice g) {
  switch (g) {
    case GateChoice::h: return "H";
    case GateChoice::rx: return "Rx";
    case GateChoice::ry: return "Ry";
  }
  return "?";
}

Family parse_family(std::string_view text) {
  const std::string t = lower(text);
  if (t == "c1") return Family::c1;
  if (t == "c2") return Family::c2;
  if (t == "c3") return Family::c3;
  if (t == "c4") return Family::c4;
  if (t == "c5") return Family::c5;
  throw Error(Errc::invalid_argument, "unknown circuit family '" + std::string(text) + "'");
}

GateChoice parse_gate_choice(std::string_view text) {
  const std::string t = lower(text);
  if (t == "h") return GateChoice::h;
  if (t == "rx") return GateChoice::rx;
  if (t == "ry") return GateChoice::ry;
  throw Error(Errc::invalid_argument, "unknown gate choice '" + std::string(text) + "'");
}

CircuitSpec CircuitSpec::make(Family family, GateChoice gate, std::vector<QubitId> qubits) {
  CircuitSpec s;
  s.family = family;
  s.gate = gate;
  s.qubits = std::move(qubits);
  s.repetitions = family == Family::c5 ? 2 : 1;
  return s;
}

CircuitSpec normalized(CircuitSpec spec) {
  if (spec.qubits.empty()) throw Error(Errc::invalid_argument, "circuit spec has an empty qubit list");
  std::sort(spec.qubits.begin(), spec.qubits.end());
  if (std::adjacent_find(spec.qubits.begin(), spec.qubits.end()) != spec.qubits.end()) {
    throw Error(Errc::invalid_argument, "circuit spec lists a qubit twice");
  }
  const auto name = std::string(family_name(spec.family));
  switch (spec.family) {
    case Family::c1:
    case Family::c4:
    case Family::c5:
      if (spec.qubits.size() != 1) throw Error(Errc::invalid_argument, name + " uses exactly one qubit");
      break;
    case Family::c2: break;
    case Family::c3:
      if (spec.qubits.size() < 2) throw Error(Errc::invalid_argument, "C3 needs at least two qubits");
      break;
  }
  if (spec.family == Family::c5) {
    if (spec.repetitions < 2) throw Error(Errc::invalid_argument, "C5 needs at least two repetitions");
  } else if (spec.repetitions != 1) {
    throw Error(Errc::invalid_argument, name + " does not take repetitions");
  }
  if (spec.stream_qubit) {
    if (spec.family != Family::c2 && spec.family != Family::c3) {
      throw Error(Errc::invalid_argument, "stream_qubit applies to multi-qubit families only");
    }
    if (!std::binary_search(spec.qubits.begin(), spec.qubits.end(), *spec.stream_qubit)) {
      throw Error(Errc::invalid_argument, "stream_qubit is not among the spec qubits");
    }
  }
  return spec;
}

std::string execution_key(const CircuitSpec& spec) {
  std::string key = std::string(family_name(spec.family)) + "-" + std::string(gate_choice_name(spec.gate)) + "-q";
  for (QubitId q : spec.qubits) key += std::to_string(q);
  if (spec.family == Family::c5) key += "-r" + std::to_string(spec.repetitions);
  return key;
}

std::string spec_key(const CircuitSpec& spec) {
  std::string key = execution_key(spec);
  if (spec.stream_qubit) key += "-s" + std::to_string(*spec.stream_qubit);
  return key;
}

QubitId ghz_source(const std::vector<QubitId>& qubits, const Topology& topology) {
  auto adjacent_to_all = [&](QubitId src) {
    return std::all_of(qubits.begin(), qubits.end(),
                       [&](QubitId q) { return q == src || topology.has_edge(src, q); });
  };
  const auto hub = topology.hub();
  if (hub && std::find(qubits.begin(), qubits.end(), *hub) != qubits.end() && adjacent_to_all(*hub)) return *hub;
  std::vector<QubitId> sorted = qubits;
  std::sort(sorted.begin(), sorted.end());
  for (QubitId q : sorted)
    if (adjacent_to_all(q)) return q;
  throw Error(Errc::not_connectable, "qubit set has no vertex adjacent to all others in the topology");
}

Circuit build(const CircuitSpec& raw, const Topology& topology) {
  const CircuitSpec spec = normalized(raw);
  for (QubitId q : spec.qubits)
    if (q >= topology.n_qubits()) throw Error(Errc::out_of_range, "spec qubit outside topology");
  std::vector<Op> ops;
  const QubitId first = spec.qubits.front();
  switch (spec.family) {
    case Family::c1:
      ops.push_back(superposition_gate(spec.gate, first));
      ops.push_back(Measure{{first}});
      break;
    case Family::c2:
      for (QubitId q : spec.qubits) ops.push_back(superposition_gate(spec.gate, q));
      ops.push_back(Measure{spec.qubits});
      break;
    case Family::c3: {
      const QubitId src = ghz_source(spec.qubits, topology);
      ops.push_back(superposition_gate(spec.gate, src));
      for (QubitId q : spec.qubits)
        if (q != src) ops.push_back(Gate::cx(src, q));
      ops.push_back(Measure{spec.qubits});
      break;
    }
    case Family::c4:
      ops.push_back(Gate::x(first));
      ops.push_back(superposition_gate(spec.gate, first));
      ops.push_back(Measure{{first}});
      break;
    case Family::c5:
      for (std::size_t r = 0; r < spec.repetitions; ++r) {
        ops.push_back(superposition_gate(spec.gate, first));
        ops.push_back(Measure{{first}});
      }
      break;
  }
  return Circuit(topology.n_qubits(), std::move(ops), false);
}

Circuit transpile(const Circuit& circuit, const Topology& topology) {
  if (circuit.n_qubits() > topology.n_qubits()) throw Error(Errc::out_of_range, "circuit wider than topology");
  std::vector<Op> out;
  out.reserve(circuit.ops().size() * 2);
  for (const Op& op : circuit.ops()) {
    const auto* g = std::get_if<Gate>(&op);
    if (!g) {
      out.push_back(op);
      continue;
    }
    if (is_two_qubit(g->kind) && !topology.has_edge(g->q0, g->q1)) {
      throw Error(Errc::no_route, "two-qubit gate on non-adjacent qubits " + std::to_string(g->q0) + "," +
                                      std::to_string(g->q1));
    }
    switch (g->kind) {
      case GateKind::rx:
      case GateKind::ry:
      case GateKind::cz: out.push_back(*g); break;
      case GateKind::h:
        out.push_back(Gate::ry(kHalfPi, g->q0));
        out.push_back(Gate::rx(kPi, g->q0));
        break;
      case GateKind::x: out.push_back(Gate::rx(kPi, g->q0)); break;
      case GateKind::cx:
        out.push_back(Gate::ry(kHalfPi, g->q1));
        out.push_back(Gate::rx(kPi, g->q1));
        out.push_back(Gate::cz(g->q0, g->q1));
        out.push_back(Gate::ry(kHalfPi, g->q1));
        out.push_back(Gate::rx(kPi, g->q1));
        break;
    }
  }
  return Circuit(circuit.n_qubits(), std::move(out), true);
}

std::vector<std::vector<QubitId>> enumerate_c3_subsets(const Topology& topology) {
  const auto hub = topology.hub();
  if (!hub) throw Error(Errc::no_hub, "topology has no hub");
  const std::vector<QubitId> leaves = topology.neighbors(*hub);
  if (leaves.size() >= 31) throw Error(Errc::out_of_range, "too many hub neighbours to enumerate");
  std::vector<std::vector<QubitId>> subsets;
  for (std::uint32_t mask = 1; mask < (1u << leaves.size()); ++mask) {
    std::vector<QubitId> s{*hub};
    for (std::size_t i = 0; i < leaves.size(); ++i)
      if (mask & (1u << i)) s.push_back(leaves[i]);
    std::sort(s.begin(), s.end());
    subsets.push_back(std::move(s));
  }
  std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return subsets;
}

std::vector<CircuitSpec> enumerate_paper_grid(const Topology& topology) {
  constexpr GateChoice gates[] = {GateChoice::h, GateChoice::rx, GateChoice::ry};
  std::vector<QubitId> all(topology.n_qubits());
  for (QubitId q = 0; q < all.size(); ++q) all[q] = q;

  std::vector<CircuitSpec> grid;
  for (Family fam : {Family::c1, Family::c2, Family::c4, Family::c5})
    for (GateChoice g : gates)
      for (QubitId q : all) {
        if (fam == Family::c2) {
          CircuitSpec s = CircuitSpec::make(fam, g, all);
          s.stream_qubit = q;
          grid.push_back(std::move(s));
        } else {
          grid.push_back(CircuitSpec::make(fam, g, {q}));
        }
      }
  for (const auto& subset : enumerate_c3_subsets(topology))
    for (GateChoice g : gates) grid.push_back(CircuitSpec::make(Family::c3, g, subset));
  return grid;
}

std::string dump_circuit(const Circuit& circuit) {
  std::ostringstream out;
  out.precision(17);
  for (const Op& op : circuit.ops()) {
    if (const auto* g = std::get_if<Gate>(&op)) {
      out << gate_name(g->kind);
      if (g->kind == GateKind::rx || g->kind == GateKind::ry) out << '(' << g->theta << ')';
      out << ' ' << g->q0;
      if (is_two_qubit(g->kind)) out << ' ' << g->q1;
    } else {
      out << 'M';
      for (QubitId q : std::get<Measure>(op).qubits) out << ' ' << q;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace qrng
