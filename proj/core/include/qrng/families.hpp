#pragma once

// The five QRNG circuit families, their construction over a device topology,
// and lowering to the native {Rx, Ry, CZ} gate set.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrng/qcore.hpp"

namespace qrng {

enum class Family { c1, c2, c3, c4, c5 };
enum class GateChoice { h, rx, ry };

std::string_view family_name(Family f);   // "C1".."C5"
std::string_view gate_choice_name(GateChoice g);  // "H", "Rx", "Ry"
Family parse_family(std::string_view text);
GateChoice parse_gate_choice(std::string_view text);

/// One circuit subvariant.
///
/// `repetitions` is the number of prepare+measure rounds without reset; it must be
/// >= 2 for C5 and 1 for every other family. `stream_qubit` selects a single
/// qubit's bits out of a multi-qubit circuit (the per-qubit C2 streams).
struct CircuitSpec {
  Family family = Family::c1;
  GateChoice gate = GateChoice::h;
  std::vector<QubitId> qubits;
  std::size_t repetitions = 1;
  std::optional<QubitId> stream_qubit;

  /// Spec with the family's default repetition count (2 for C5).
  static CircuitSpec make(Family family, GateChoice gate, std::vector<QubitId> qubits);

  friend bool operator==(const CircuitSpec&, const CircuitSpec&) = default;
};

/// Checks the per-family invariants and sorts `qubits`; throws on violation.
CircuitSpec normalized(CircuitSpec spec);

/// Stable textual key, e.g. "C3-Ry-q0123", "C2-H-q01234-s3", "C5-Rx-q1-r2".
std::string spec_key(const CircuitSpec& spec);

/// Key of the circuit actually executed; specs differing only in stream_qubit share it.
std::string execution_key(const CircuitSpec& spec);

/// The GHZ source of a C3 qubit set: the hub if it is adjacent to every other
/// member, else the lowest-id member that is. Throws NotConnectable if none.
QubitId ghz_source(const std::vector<QubitId>& qubits, const Topology& topology);

/// Abstract (pre-transpilation) circuit on topology.n_qubits() qubits.
Circuit build(const CircuitSpec& spec, const Topology& topology);

/// H -> Ry(pi/2) Rx(pi); X -> Rx(pi); CX(c,t) -> Ry(pi/2) t, Rx(pi) t, CZ(c,t), Ry(pi/2) t, Rx(pi) t.
/// Throws NoRoute for two-qubit gates on non-edges.
Circuit transpile(const Circuit& circuit, const Topology& topology);

/// Hub plus every nonempty subset of its neighbours, ordered by size then lexicographically.
std::vector<std::vector<QubitId>> enumerate_c3_subsets(const Topology& topology);

/// The 105-spec experiment grid: C1/C4/C5 per (gate, qubit); C2 as the per-qubit
/// streams of one all-qubit circuit per gate; C3 per (gate, hub subset).
std::vector<CircuitSpec> enumerate_paper_grid(const Topology& topology);

/// One op per line: `RY(1.5707963267948966) 2`, `CZ 2 0`, `M 0 1 2`.
std::string dump_circuit(const Circuit& circuit);

}  // namespace qrng
