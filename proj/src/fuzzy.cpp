#include "semloss/fuzzy.hpp"

#include <numeric>

#include "semloss/encoders.hpp"
#include "semloss/engine.hpp"

namespace semloss {
namespace {

double eval_node(const Formula& f, const ProbVector& p, const FuzzyNorm& norm) {
  switch (f.kind()) {
    case Formula::Kind::True: return 1.0;
    case Formula::Kind::False: return 0.0;
    case Formula::Kind::Lit: {
      double v = p[f.lit().var - 1];
      return f.lit().positive ? v : norm.negate(v);
    }
    case Formula::Kind::Not: return norm.negate(eval_node(f.children()[0], p, norm));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      auto kids = f.children();
      double acc = eval_node(kids[0], p, norm);
      for (std::size_t i = 1; i < kids.size(); ++i) {
        double v = eval_node(kids[i], p, norm);
        acc = f.kind() == Formula::Kind::And ? norm.conjoin(acc, v) : norm.disjoin(acc, v);
      }
      return acc;
    }
  }
  return 0.0;
}

std::vector<VarId> first_n(std::size_t n) {
  std::vector<VarId> vars(n);
  std::iota(vars.begin(), vars.end(), VarId{1});
  return vars;
}

}  // namespace

double fuzzy_eval(const Formula& f, const ProbVector& p, const FuzzyNorm& norm) {
  check_probabilities(p, f.universe());
  return eval_node(f, p, norm);
}

Formula fuzzy_encoding_dnf(std::size_t n) { return exactly_one_dnf(first_n(n)).with_universe(n); }

Formula fuzzy_encoding_cnf(std::size_t n) { return exactly_one_cnf(first_n(n)).with_universe(n); }

std::vector<FuzzySample> fuzzy_comparison(const std::vector<ProbVector>& samples) {
  std::vector<FuzzySample> out;
  if (samples.empty()) return out;
  const std::size_t n = static_cast<std::size_t>(samples.front().size());
  Formula enc1 = fuzzy_encoding_dnf(n), enc2 = fuzzy_encoding_cnf(n);
  Circuit c1 = compile_to_circuit(enc1), c2 = compile_to_circuit(enc2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& p = samples[i];
    out.push_back({i, fuzzy_eval(enc1, p), fuzzy_eval(enc2, p), semantic_loss(c1, p), semantic_loss(c2, p)});
  }
  return out;
}

}  // namespace semloss
