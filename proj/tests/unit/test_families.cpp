#include <gtest/gtest.h>

#include <map>
#include <set>

#include "qrng/error.hpp"
#include "qrng/families.hpp"

using namespace qrng;

namespace {

Matrix unitary_on(const Circuit& c) { return circuit_unitary(c); }

}  // namespace

TEST(Families, PaperGridHas105Specs) {
  const auto grid = enumerate_paper_grid(Topology::spark());
  ASSERT_EQ(grid.size(), 105u);
  std::map<Family, int> per_family;
  std::set<std::string> keys, executions;
  for (const auto& s : grid) {
    ++per_family[s.family];
    keys.insert(spec_key(s));
    executions.insert(execution_key(s));
    EXPECT_NO_THROW(normalized(s));
  }
  EXPECT_EQ(per_family[Family::c1], 15);
  EXPECT_EQ(per_family[Family::c2], 15);
  EXPECT_EQ(per_family[Family::c3], 45);
  EXPECT_EQ(per_family[Family::c4], 15);
  EXPECT_EQ(per_family[Family::c5], 15);
  EXPECT_EQ(keys.size(), 105u);
  // C2 per-qubit streams fold into one execution per gate.
  EXPECT_EQ(executions.size(), 105u - 12u);
}

TEST(Families, C3SubsetsContainHub) {
  const auto subsets = enumerate_c3_subsets(Topology::spark());
  ASSERT_EQ(subsets.size(), 15u);
  EXPECT_EQ(subsets.front().size(), 2u);
  EXPECT_EQ(subsets.back(), (std::vector<QubitId>{0, 1, 2, 3, 4}));
  for (const auto& s : subsets) EXPECT_TRUE(std::count(s.begin(), s.end(), 2u) == 1);
  EXPECT_THROW(enumerate_c3_subsets(Topology(3, {{0, 1}, {1, 2}})), Error);
}

TEST(Families, Keys) {
  auto c3 = CircuitSpec::make(Family::c3, GateChoice::ry, {3, 0, 2, 1});
  EXPECT_EQ(spec_key(normalized(c3)), "C3-Ry-q0123");
  auto c2 = CircuitSpec::make(Family::c2, GateChoice::h, {0, 1, 2, 3, 4});
  c2.stream_qubit = 3;
  EXPECT_EQ(spec_key(c2), "C2-H-q01234-s3");
  EXPECT_EQ(execution_key(c2), "C2-H-q01234");
  EXPECT_EQ(spec_key(CircuitSpec::make(Family::c5, GateChoice::rx, {1})), "C5-Rx-q1-r2");
}

TEST(Families, NormalizationRejectsBadSpecs) {
  EXPECT_THROW(normalized(CircuitSpec::make(Family::c1, GateChoice::h, {0, 1})), Error);
  EXPECT_THROW(normalized(CircuitSpec::make(Family::c3, GateChoice::h, {2})), Error);
  EXPECT_THROW(normalized(CircuitSpec::make(Family::c2, GateChoice::h, {1, 1})), Error);
  auto c5 = CircuitSpec::make(Family::c5, GateChoice::h, {0});
  c5.repetitions = 1;
  EXPECT_THROW(normalized(c5), Error);
  auto c1 = CircuitSpec::make(Family::c1, GateChoice::h, {0});
  c1.stream_qubit = 0;
  EXPECT_THROW(normalized(c1), Error);
  EXPECT_THROW(parse_family("C6"), Error);
  EXPECT_EQ(parse_gate_choice("rY"), GateChoice::ry);
}

TEST(Families, GhzSource) {
  const Topology spark = Topology::spark();
  EXPECT_EQ(ghz_source({0, 2, 4}, spark), 2u);
  EXPECT_EQ(ghz_source({0, 2}, spark), 2u);
  EXPECT_THROW(ghz_source({0, 1}, spark), Error);
  const Topology line(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(ghz_source({0, 1, 2}, line), 1u);
}

TEST(Families, TranspilePreservesUnitary) {
  const Topology spark = Topology::spark();
  for (const auto& spec : enumerate_paper_grid(spark)) {
    const Circuit abstract = build(spec, spark);
    const Circuit native = transpile(abstract, spark);
    EXPECT_TRUE(native.native_only());
    for (const Op& op : native.ops())
      if (const auto* g = std::get_if<Gate>(&op)) EXPECT_TRUE(is_native(g->kind));
    EXPECT_TRUE(equal_up_to_global_phase(unitary_on(abstract), unitary_on(native), 1e-9)) << spec_key(spec);
    EXPECT_EQ(abstract.measurements(), native.measurements());
  }
}

TEST(Families, TranspileRejectsNonEdges) {
  Circuit c(5, {Gate::cx(0, 1), Measure{{0, 1}}}, false);
  try {
    transpile(c, Topology::spark());
    FAIL() << "expected NoRoute";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::no_route);
  }
}

TEST(Families, C5MeasuresRepeatedly) {
  auto spec = CircuitSpec::make(Family::c5, GateChoice::ry, {4});
  spec.repetitions = 3;
  const Circuit c = build(spec, Topology::spark());
  EXPECT_EQ(c.measurements().size(), 3u);
  EXPECT_EQ(c.gate_count(), 3u);
}

TEST(Families, DumpCircuit) {
  const Circuit c = transpile(build(CircuitSpec::make(Family::c1, GateChoice::h, {2}), Topology::spark()),
                              Topology::spark());
  const std::string text = dump_circuit(c);
  EXPECT_NE(text.find("RY(1.5707963267948966) 2"), std::string::npos);
  EXPECT_NE(text.find("M 2"), std::string::npos);
}
