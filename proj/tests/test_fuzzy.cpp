#include <gtest/gtest.h>

#include "fuzzy_fixtures.hpp"
#include "semloss/axioms.hpp"
#include "semloss/fuzzy.hpp"

using namespace semloss;

namespace {

ProbVector to_probs(const std::vector<double>& xs) {
  return Eigen::Map<const ProbVector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

}  // namespace

TEST(Fuzzy, HandEvaluatedFixtures) {
  for (const auto& fx : fuzzy_fixtures())
    EXPECT_EQ(fuzzy_eval(parse_sexpr(fx.formula), to_probs(fx.p)), fx.expected) << fx.formula;
}

TEST(Fuzzy, LukasiewiczOperators) {
  EXPECT_NEAR(FuzzyNorm::conjoin(0.7, 0.6), 0.3, 1e-15);
  EXPECT_EQ(FuzzyNorm::conjoin(0.2, 0.3), 0.0);
  EXPECT_EQ(FuzzyNorm::disjoin(0.7, 0.6), 1.0);
  EXPECT_EQ(FuzzyNorm::negate(0.25), 0.75);
}

TEST(Fuzzy, EncodingsAreExactlyOne) {
  ProbVector p(3);
  p << 1, 0, 0;
  EXPECT_EQ(fuzzy_eval(fuzzy_encoding_cnf(3), p), 1.0);
  EXPECT_EQ(fuzzy_eval(fuzzy_encoding_dnf(3), p), 1.0);
  EXPECT_EQ(enumerate_models(fuzzy_encoding_cnf(4)), enumerate_models(fuzzy_encoding_dnf(4)));
}

TEST(Fuzzy, CrispInputsMatchBooleanEvaluation) {
  Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    Formula f = random_formula(rng, 5, 4);
    for (unsigned bits = 0; bits < 32; ++bits) {
      State s(5);
      ProbVector p(5);
      for (int j = 0; j < 5; ++j) {
        s[static_cast<std::size_t>(j)] = (bits >> j) & 1;
        p[j] = s[static_cast<std::size_t>(j)];
      }
      EXPECT_EQ(fuzzy_eval(f, p), eval_state(f, s) ? 1.0 : 0.0);
    }
  }
}

TEST(Fuzzy, SyntaxSensitiveWhereSemanticLossIsNot) {
  Rng rng(52);
  std::vector<ProbVector> samples;
  for (int i = 0; i < 1000; ++i) samples.push_back(random_probs(rng, 3));
  auto rows = fuzzy_comparison(samples);
  ASSERT_EQ(rows.size(), samples.size());
  std::size_t differing = 0;
  for (const auto& r : rows) {
    differing += r.enc1 != r.enc2;
    EXPECT_NEAR(r.loss1, r.loss2, 1e-9);
  }
  EXPECT_GT(differing, 0u);
}
