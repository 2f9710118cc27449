#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qrng/error.hpp"
#include "qrng/qcore.hpp"

using namespace qrng;
using std::numbers::pi;

namespace {

bool is_unitary(const Matrix& u) {
  const Matrix p = u.adjoint() * u;
  return equal_up_to_global_phase(p, Matrix::identity(u.dim()), 1e-12) && std::abs(p(0, 0) - 1.0) < 1e-12;
}

}  // namespace

TEST(Qcore, GateMatricesAreUnitary) {
  for (auto k : {GateKind::rx, GateKind::ry, GateKind::h, GateKind::x}) EXPECT_TRUE(is_unitary(gate_matrix(k, 0.37)));
  for (auto k : {GateKind::cz, GateKind::cx}) EXPECT_TRUE(is_unitary(gate_matrix(k)));
}

TEST(Qcore, HadamardIsRyThenRx) {
  // Ry(pi/2) applied first, then Rx(pi): the product is Rx * Ry.
  const Matrix lowered = gate_matrix(GateKind::rx, pi) * gate_matrix(GateKind::ry, pi / 2);
  EXPECT_TRUE(equal_up_to_global_phase(lowered, gate_matrix(GateKind::h), 1e-12));
  EXPECT_TRUE(equal_up_to_global_phase(gate_matrix(GateKind::rx, pi), gate_matrix(GateKind::x), 1e-12));
}

TEST(Qcore, GlobalPhaseComparisonRejectsDifferentGates) {
  EXPECT_FALSE(equal_up_to_global_phase(gate_matrix(GateKind::h), gate_matrix(GateKind::x), 1e-6));
  EXPECT_FALSE(equal_up_to_global_phase(gate_matrix(GateKind::rx, 0.1), gate_matrix(GateKind::rx, 0.2), 1e-6));
}

TEST(Qcore, QubitZeroIsLeastSignificant) {
  StateVector s(3);
  s.apply(Gate::x(1));
  EXPECT_NEAR(s.probability(2), 1.0, 1e-15);
  s.apply(Gate::cx(1, 0));
  EXPECT_NEAR(s.probability(3), 1.0, 1e-15);
}

TEST(Qcore, BellStateMarginals) {
  StateVector s(2);
  s.apply(Gate::h(0));
  s.apply(Gate::cx(0, 1));
  const std::vector<QubitId> both{0, 1};
  const auto m = s.marginal(both);
  EXPECT_NEAR(m[0], 0.5, 1e-15);
  EXPECT_NEAR(m[1], 0.0, 1e-15);
  EXPECT_NEAR(m[2], 0.0, 1e-15);
  EXPECT_NEAR(m[3], 0.5, 1e-15);
  const std::vector<QubitId> one{1};
  EXPECT_NEAR(s.marginal(one)[1], 0.5, 1e-15);
}

TEST(Qcore, MeasurementCollapses) {
  StateVector s(2);
  s.apply(Gate::h(0));
  s.apply(Gate::cx(0, 1));
  const std::vector<QubitId> q0{0};
  for (std::uint64_t shot = 0; shot < 32; ++shot) {
    StreamRng rng(7, shot);
    const auto r = measure(s, q0, rng);
    const std::size_t expect = r.bits[0] ? 3 : 0;
    EXPECT_NEAR(r.state.probability(expect), 1.0, 1e-12);
  }
}

TEST(Qcore, MeasurementFrequencyFollowsBornRule) {
  StateVector s(1);
  s.apply(Gate::ry(2 * std::acos(std::sqrt(0.8)), 0));  // Pr(1) = 0.2
  const std::vector<QubitId> q{0};
  int ones = 0;
  const int shots = 20000;
  for (int i = 0; i < shots; ++i) {
    StreamRng rng(11, i);
    ones += measure(s, q, rng).bits[0];
  }
  EXPECT_NEAR(ones / double(shots), 0.2, 4 * std::sqrt(0.16 / shots));
}

TEST(Qcore, FromAmplitudesValidates) {
  EXPECT_THROW(StateVector::from_amplitudes(1, {1.0, 1.0}), Error);
  EXPECT_THROW(StateVector::from_amplitudes(2, {1.0, 0.0}), Error);
  EXPECT_NO_THROW(StateVector::from_amplitudes(1, {std::sqrt(0.5), std::sqrt(0.5)}));
}

TEST(Qcore, SparkTopology) {
  const Topology t = Topology::spark();
  EXPECT_EQ(t.n_qubits(), 5u);
  EXPECT_EQ(t.edges().size(), 4u);
  ASSERT_TRUE(t.hub().has_value());
  EXPECT_EQ(*t.hub(), 2u);
  EXPECT_TRUE(t.has_edge(0, 2));
  EXPECT_TRUE(t.has_edge(4, 2));
  EXPECT_FALSE(t.has_edge(0, 1));
  EXPECT_EQ(t.neighbors(2).size(), 4u);
}

TEST(Qcore, CalibrationRoundTrip) {
  CalibrationSnapshot c({{0.04, 0.02, 0.999, 0.99, 1.0, 1.2}, {0.01, 0.03, 0.998, 0.98, 0.9, 1.1}});
  const auto back = CalibrationSnapshot::parse(c.to_text());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_DOUBLE_EQ(back.at(0).p01, 0.04);
  EXPECT_DOUBLE_EQ(back.at(1).p10, 0.03);
  EXPECT_THROW(back.at(2), Error);
  EXPECT_THROW(CalibrationSnapshot::parse("{\"qubits\": [{\"p01\": 1.5, \"p10\": 0}]}"), Error);
  EXPECT_THROW(CalibrationSnapshot::parse("not json"), Error);
}

TEST(Qcore, CircuitUnitaryMatchesIdealState) {
  Circuit c(3, {Gate::h(2), Gate::cx(2, 0), Gate::cx(2, 1), Measure{{0, 1, 2}}}, false);
  const StateVector s = ideal_state(c);
  EXPECT_NEAR(s.probability(0), 0.5, 1e-12);
  EXPECT_NEAR(s.probability(7), 0.5, 1e-12);
  const Matrix u = circuit_unitary(c);
  EXPECT_NEAR(std::abs(u(7, 0)), std::sqrt(0.5), 1e-12);
  EXPECT_EQ(c.gate_count(), 3u);
  EXPECT_EQ(c.measurements().size(), 1u);
}
