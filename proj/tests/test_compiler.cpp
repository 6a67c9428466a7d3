#include <gtest/gtest.h>

#include <cmath>

#include "semloss/axioms.hpp"
#include "semloss/circuit.hpp"
#include "semloss/encoders.hpp"
#include "semloss/engine.hpp"

using namespace semloss;

namespace {

std::vector<VarId> vars(std::size_t n) {
  std::vector<VarId> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<VarId>(i + 1);
  return v;
}

// Random CNF with `clauses` clauses of width 1..3.
Formula random_cnf(Rng& rng, std::size_t n, std::size_t clauses) {
  std::uniform_int_distribution<VarId> var(1, static_cast<VarId>(n));
  std::uniform_int_distribution<int> width(1, 3);
  std::bernoulli_distribution sign(0.5);
  std::vector<Formula> cs;
  for (std::size_t i = 0; i < clauses; ++i) {
    std::vector<Formula> lits;
    for (int k = width(rng); k > 0; --k) lits.push_back(Formula::literal(var(rng), sign(rng)));
    cs.push_back(Formula::disjunction(lits));
  }
  return Formula::conjunction(cs).with_universe(n);
}

}  // namespace

TEST(Bdd, ApplyIdentities) {
  BddManager m(3);
  BddRef x1 = m.literal(1, true);
  EXPECT_EQ(bdd_apply(m, BddOp::And, x1, m.literal(1, false)), BddManager::zero());
  EXPECT_EQ(bdd_apply(m, BddOp::Or, x1, BddManager::zero()), x1);
  EXPECT_EQ(bdd_apply(m, BddOp::Xor, x1, x1), BddManager::zero());
  EXPECT_EQ(m.negate(m.negate(x1)), x1);
}

TEST(Bdd, ExactlyOneClausesHaveThreeModels) {
  auto c = compile(exactly_one_cnf(vars(3)));
  EXPECT_EQ(model_count(c.manager, c.root, 3), 3);
  std::size_t paths = 0;
  for_each_path(c.manager, c.root, [&](const std::vector<std::int8_t>& a) {
    ++paths;
    EXPECT_EQ(std::count(a.begin(), a.end(), 1), 1);
  });
  EXPECT_EQ(paths, 3u);
}

TEST(Bdd, CanonicalForEquivalentFormulas) {
  BddManager m(3);
  Formula a = exactly_one_cnf(vars(3)), b = exactly_one_dnf(vars(3));
  EXPECT_EQ(compile_into(m, a), compile_into(m, b));
  Formula x = Formula::literal(1), y = Formula::literal(2);
  EXPECT_EQ(compile_into(m, !(x && y)), compile_into(m, !x || !y));
}

TEST(Bdd, CountsUnderUniverseShift) {
  EXPECT_EQ(model_count(compile(exactly_one_cnf(vars(4))).manager, compile(exactly_one_cnf(vars(4))).root, 4), 4);
  auto t = compile(total_order_cnf(4));
  EXPECT_EQ(model_count(t.manager, t.root, 16), 24);
  auto c = compile(Formula::literal(2));
  EXPECT_EQ(model_count(c.manager, c.root, 2), 2);
  EXPECT_EQ(model_count(c.manager, c.root, 5), 16);
}

TEST(Bdd, CustomOrderAndBlowup) {
  Formula f = exactly_one_cnf(vars(4));
  auto c = compile(f, std::vector<VarId>{4, 2, 3, 1});
  EXPECT_EQ(model_count(c.manager, c.root, 4), 4);
  auto d = compile(f, VarOrder::FirstOccurrence);
  EXPECT_EQ(model_count(d.manager, d.root, 4), 4);
  EXPECT_THROW(compile(f, std::vector<VarId>{1, 1, 2, 3}), InputError);
  EXPECT_THROW(compile(total_order_cnf(4), {}, 20), ComputeError);
}

TEST(Circuit, LiteralAndConstantShapes) {
  Circuit t = compile_to_circuit(Formula::constant(true).with_universe(2));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.node(0).kind, NodeKind::Constant);
  EXPECT_TRUE(t.node(0).value);

  Circuit x = compile_to_circuit(Formula::literal(1));
  const auto& root = x.node(x.root());
  ASSERT_EQ(root.kind, NodeKind::Sum);
  ASSERT_EQ(root.children.size(), 2u);
  for (auto ch : root.children) EXPECT_EQ(x.node(ch).kind, NodeKind::Product);
  EXPECT_EQ(circuit_model_count(x), 1);
  EXPECT_DOUBLE_EQ(wmc(x, ProbVector::Constant(1, 0.3)), 0.3);
}

TEST(Circuit, ExactlyOneMatchesReadOffFunction) {
  Circuit c = compile_to_circuit(exactly_one_cnf(vars(3)));
  Formula read_off = parse_sexpr(
      "(or (and x1 (not x2) (not x3)) (and (not x1) x2 (not x3)) (and (not x1) (not x2) x3))");
  BddManager m(3);
  EXPECT_EQ(circuit_to_bdd(m, c), compile_into(m, read_off));
  EXPECT_NEAR(wmc(c, ProbVector::Constant(3, 0.5)), 0.375, 1e-15);
}

TEST(Circuit, OracleEquivalenceOnRandomCnf) {
  Rng rng(21);
  for (int i = 0; i < 40; ++i) {
    Formula f = random_cnf(rng, 8, 6);
    Circuit c = compile_to_circuit(f);
    EXPECT_EQ(circuit_model_count(c), enumerate_models(f).size());
    EXPECT_TRUE(check_decomposable(c));
    EXPECT_TRUE(check_deterministic(c));
    ProbVector p = random_probs(rng, 8);
    EXPECT_NEAR(wmc(c, p), brute_force_wmc(f, p), 1e-12);
  }
}

TEST(Circuit, StructuralChecksCatchViolations) {
  CircuitBuilder b(2);
  auto x1 = b.literal(1, true), x2 = b.literal(2, true);
  Circuit overlap = b.build(b.sum({x1, x2}));
  EXPECT_FALSE(check_deterministic(overlap));
  EXPECT_TRUE(check_decomposable(overlap));
  CircuitBuilder b2(1);
  auto y = b2.literal(1, true);
  Circuit shared = b2.build(b2.product({y, b2.literal(1, false)}));
  EXPECT_FALSE(check_decomposable(shared));
}

TEST(Circuit, RejectsBadTopology) {
  std::vector<CircuitNode> nodes(2);
  nodes[0].kind = NodeKind::Sum;
  nodes[0].children = {1};
  nodes[1].kind = NodeKind::Constant;
  EXPECT_THROW(Circuit(1, nodes, 0), InputError);
  CircuitNode lit;
  lit.kind = NodeKind::Literal;
  lit.lit = {3, true};
  EXPECT_THROW(Circuit(2, {lit}, 0), InputError);
}

TEST(Circuit, JsonRoundTrip) {
  Circuit c = compile_to_circuit(total_order_cnf(3));
  auto j = to_json(c);
  EXPECT_EQ(j["universe_size"], 9);
  Circuit back = circuit_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, c);
  EXPECT_THROW(circuit_from_json(nlohmann::json{{"universe_size", 1}}), InputError);
  EXPECT_THROW(circuit_from_json(nlohmann::json::parse(
                   R"({"universe_size":1,"root":0,"nodes":[{"kind":"bogus"}]})")),
               InputError);
}

TEST(Circuit, NonSmoothCircuitStillCountsCorrectly) {
  // x1 or (not x1 and x2): the x1 branch skips x2.
  Formula f = Formula::literal(1) || (!Formula::literal(1) && Formula::literal(2));
  Circuit c = compile_to_circuit(f);
  EXPECT_EQ(circuit_model_count(c), 3);
  ProbVector p(2);
  p << 0.2, 0.7;
  EXPECT_NEAR(wmc(c, p), 0.2 + 0.8 * 0.7, 1e-15);
}
