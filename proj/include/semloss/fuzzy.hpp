#pragma once

#include <vector>

#include "semloss/logic.hpp"

namespace semloss {

// Lukasiewicz operators over soft truth values:
//   a and b = max{0, a + b - 1},  a or b = min{a + b, 1},  not a = 1 - a.
// N-ary nodes fold left to right.
struct FuzzyNorm {
  static double conjoin(double a, double b) { return a + b - 1.0 > 0.0 ? a + b - 1.0 : 0.0; }
  static double disjoin(double a, double b) { return a + b < 1.0 ? a + b : 1.0; }
  static double negate(double a) { return 1.0 - a; }
};

double fuzzy_eval(const Formula& f, const ProbVector& p, const FuzzyNorm& norm = {});

// The two exactly-one encodings compared in the fuzzy-logic baseline:
// the disjunction of one-hot terms, and the clause encoding.
Formula fuzzy_encoding_dnf(std::size_t n);
Formula fuzzy_encoding_cnf(std::size_t n);

struct FuzzySample {
  std::size_t id;
  double enc1;           // fuzzy value of the one-hot disjunction
  double enc2;           // fuzzy value of the clause encoding
  double loss1;          // semantic loss of the one-hot disjunction
  double loss2;          // semantic loss of the clause encoding
};

// Compares both encodings on p vectors from `samples`.
std::vector<FuzzySample> fuzzy_comparison(const std::vector<ProbVector>& samples);

}  // namespace semloss
