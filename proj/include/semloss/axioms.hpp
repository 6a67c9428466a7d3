#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "semloss/logic.hpp"

namespace semloss {

using Rng = std::mt19937_64;

// Random formula tree over X1..Xn with the universe fixed to n.
Formula random_formula(Rng& rng, std::size_t num_vars, std::size_t depth);

// Uniform probabilities in [lo, hi].
ProbVector random_probs(Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0);

// Uniformly random permutation of 1..n.
std::vector<VarId> random_permutation(Rng& rng, std::size_t n);

struct AxiomResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  bool passed() const { return failures == 0; }
};

struct AxiomReport {
  std::vector<AxiomResult> results;
  bool all_passed() const;
  std::string to_text() const;
};

struct AxiomSuiteConfig {
  std::uint64_t seed = 7;
  std::size_t instances = 100;
  double tolerance = 1e-9;
};

// Checks the loss axioms and their propositions on compiled circuits:
// Truth, Additive Independence, Locality, Monotonicity, Identity,
// Satisfaction, Label-Literal Correspondence, Value Symmetry and Variable
// Symmetry.
AxiomReport axiom_suite(const AxiomSuiteConfig& cfg = {});

}  // namespace semloss
