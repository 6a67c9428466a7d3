#include "semloss/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "semloss/encoders.hpp"
#include "semloss/engine.hpp"

namespace semloss {

Formula random_formula(Rng& rng, std::size_t num_vars, std::size_t depth) {
  std::uniform_int_distribution<VarId> var(1, static_cast<VarId>(num_vars));
  std::bernoulli_distribution coin(0.5);
  std::function<Formula(std::size_t)> gen = [&](std::size_t d) -> Formula {
    std::uniform_int_distribution<int> pick(0, d == 0 ? 0 : 9);
    int k = pick(rng);
    if (k <= 2) return Formula::literal(var(rng), coin(rng));
    if (k == 3) return Formula::negation(gen(d - 1));
    std::uniform_int_distribution<int> arity(2, 3);
    std::vector<Formula> kids;
    for (int i = arity(rng); i > 0; --i) kids.push_back(gen(d - 1));
    return k <= 6 ? Formula::conjunction(std::move(kids)) : Formula::disjunction(std::move(kids));
  };
  return gen(depth).with_universe(num_vars);
}

ProbVector random_probs(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  ProbVector p(static_cast<Eigen::Index>(n));
  for (auto& x : p) x = u(rng);
  return p;
}

std::vector<VarId> random_permutation(Rng& rng, std::size_t n) {
  std::vector<VarId> perm(n);
  std::iota(perm.begin(), perm.end(), VarId{1});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

bool AxiomReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const AxiomResult& r) { return r.passed(); });
}

std::string AxiomReport::to_text() const {
  std::ostringstream os;
  for (const auto& r : results)
    os << (r.passed() ? "PASS " : "FAIL ") << r.name << "  instances=" << r.instances << " failures=" << r.failures
       << " max_error=" << r.max_error << '\n';
  return os.str();
}

namespace {

class Checker {
 public:
  Checker(const AxiomSuiteConfig& cfg, std::string name) : cfg_(cfg) { result_.name = std::move(name); }

  // Records |a - b| relative to max(1, |b|); two infinities compare equal.
  void expect_close(double a, double b) {
    double err = (std::isinf(a) && std::isinf(b) && a == b) ? 0.0 : std::abs(a - b) / std::max(1.0, std::abs(b));
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    record(err, err <= cfg_.tolerance);
  }
  void expect_exact(double a, double b) { record(std::abs(a - b), a == b); }
  void expect_at_least(double a, double b, double slack) { record(std::max(0.0, b - a), a >= b - slack); }

  void next() { ++result_.instances; }
  AxiomResult done() { return result_; }

 private:
  void record(double err, bool ok) {
    result_.max_error = std::max(result_.max_error, err);
    if (!ok) ++result_.failures;
  }

  const AxiomSuiteConfig& cfg_;
  AxiomResult result_;
};

std::size_t vars_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// A random formula with at least one model.
Formula satisfiable_formula(Rng& rng, std::size_t n, std::size_t depth) {
  for (;;) {
    Formula f = random_formula(rng, n, depth);
    auto c = compile(f);
    if (c.root != BddManager::zero()) return f;
  }
}

Circuit shift_into(const Formula& f, std::size_t offset, std::size_t universe) {
  std::vector<VarId> perm(f.universe());
  std::iota(perm.begin(), perm.end(), static_cast<VarId>(offset + 1));
  return compile_to_circuit(rename(f, perm).with_universe(universe));
}

}  // namespace

AxiomReport axiom_suite(const AxiomSuiteConfig& cfg) {
  AxiomReport report;
  Rng rng(cfg.seed);
  const std::size_t count = cfg.instances;

  {
    Checker ck(cfg, "Truth");
    for (std::size_t i = 0; i < count; ++i) {
      ck.next();
      auto n = vars_between(rng, 1, 10);
      Circuit truth = compile_to_circuit(Formula::constant(true).with_universe(n));
      ck.expect_exact(semantic_loss(truth, random_probs(rng, n)), 0.0);
    }
    report.results.push_back(ck.done());
  }
  {
    Checker ck(cfg, "Additive Independence");
    for (std::size_t i = 0; i < count; ++i) {
      ck.next();
      auto a = vars_between(rng, 1, 5), b = vars_between(rng, 1, 5);
      Formula alpha = satisfiable_formula(rng, a, 3), beta = satisfiable_formula(rng, b, 3);
      ProbVector p = random_probs(rng, a), q = random_probs(rng, b);
      ProbVector pq(static_cast<Eigen::Index>(a + b));
      pq << p, q;
      std::vector<VarId> shift(b);
      std::iota(shift.begin(), shift.end(), static_cast<VarId>(a + 1));
      Formula joint = (alpha && rename(beta, shift)).with_universe(a + b);
      ck.expect_close(semantic_loss(compile_to_circuit(joint), pq),
                      semantic_loss(compile_to_circuit(alpha), p) + semantic_loss(compile_to_circuit(beta), q));
    }
    report.results.push_back(ck.done());
  }
  {
    Checker ck(cfg, "Locality");
    for (std::size_t i = 0; i < count; ++i) {
      ck.next();
      auto a = vars_between(rng, 1, 6), extra = vars_between(rng, 1, 4);
      Formula alpha = satisfiable_formula(rng, a, 3);
      ProbVector p = random_probs(rng, a), q = random_probs(rng, extra);
      ProbVector pq(static_cast<Eigen::Index>(a + extra));
      pq << p, q;
      ck.expect_close(semantic_loss(compile_to_circuit(alpha.with_universe(a + extra)), pq),
                      semantic_loss(compile_to_circuit(alpha), p));
      // The unused variables sit in front of alpha's.
      ProbVector qp(static_cast<Eigen::Index>(a + extra));
      qp << q, p;
      ck.expect_close(semantic_loss(shift_into(alpha, extra, a + extra), qp), semantic_loss(compile_to_circuit(alpha), p));
    }
    report.results.push_back(ck.done());
  }
  {
    Checker ck(cfg, "Monotonicity");
    for (std::size_t i = 0; i < count; ++i) {
      ck.next();
      auto n = vars_between(rng, 2, 8);
      Formula beta = random_formula(rng, n, 3), gamma = random_formula(rng, n, 3);
      Formula alpha = (beta && gamma).with_universe(n);
      ProbVector p = random_probs(rng, n);
      ck.expect_at_least(semantic_loss(compile_to_circuit(alpha), p), semantic_loss(compile_to_circuit(beta), p), 1e-12);
    }
    report.results.push_back(ck.done());
  }
  {
    Checker ck(cfg, "Identity");
    for (std::size_t i = 0; i < count; ++i) {
      ck.next();
      auto n = vars_between(rng, 1, 12);
      State x(n);
      std::bernoulli_distribution coin(0.5);
      for (auto& b : x) b = coin(rng);
      ProbVector px(static_cast<Eigen::Index>(n));
      for (std::size_t j = 0; j < n; ++j) px[static_cast<Eigen::Index>(j)] = x[j];
      ck.expect_exact(semantic_loss(compile_to_circuit(state_formula(x)), px), 0.0);
    }
    report.results.push_back(ck.done());
  }
  {
    Checker ck(cfg, "Satisfaction");
    for (std::size_t i = 0; i < count; ++i) {
      ck.next();
      auto n = vars_between(rng, 1, 8);
      Formula alpha = satisfiable_formula(rng, n, 3);
      auto models = enumerate_models(alpha);
      const State& x = models[std::uniform_int_distribution<std::size_t>(0, models.size() - 1)(rng)];
      ProbVector px(static_cast<Eigen::Index>(n));
      for (std::size_t j = 0; j < n; ++j) px[static_cast<Eigen::Index>(j)] = x[j];
      ck.expect_exact(semantic_loss(compile_to_circuit(alpha), px), 0.0);
    }
    report.results.push_back(ck.done());
  }
  {
    Checker ck(cfg, "Label-Literal Correspondence");
    for (std::size_t i = 0; i < count; ++i) {
      ck.next();
      auto n = vars_between(rng, 1, 6);
      auto v = static_cast<VarId>(vars_between(rng, 1, n));
      ProbVector p = random_probs(rng, n, 1e-6, 1.0 - 1e-6);
      double pv = p[v - 1];
      ck.expect_close(semantic_loss(compile_to_circuit(Formula::literal(v, true).with_universe(n)), p), -std::log(pv));
      ck.expect_close(semantic_loss(compile_to_circuit(Formula::literal(v, false).with_universe(n)), p),
                      -std::log(1.0 - pv));
    }
    report.results.push_back(ck.done());
  }
  {
    Checker ck(cfg, "Value Symmetry");
    for (std::size_t i = 0; i < count; ++i) {
      ck.next();
      auto n = vars_between(rng, 1, 8);
      Formula alpha = random_formula(rng, n, 3);
      ProbVector p = random_probs(rng, n);
      ProbVector flipped = ProbVector::Ones(p.size()) - p;
      ck.expect_close(semantic_loss(compile_to_circuit(mirror(alpha)), flipped),
                      semantic_loss(compile_to_circuit(alpha), p));
    }
    report.results.push_back(ck.done());
  }
  {
    Checker ck(cfg, "Variable Symmetry");
    for (std::size_t i = 0; i < count; ++i) {
      ck.next();
      auto n = vars_between(rng, 2, 8);
      Formula alpha = random_formula(rng, n, 3);
      ProbVector p = random_probs(rng, n);
      auto perm = random_permutation(rng, n);
      ProbVector permuted(p.size());
      for (std::size_t j = 0; j < n; ++j) permuted[perm[j] - 1] = p[static_cast<Eigen::Index>(j)];
      ck.expect_close(semantic_loss(compile_to_circuit(rename(alpha, perm)), permuted),
                      semantic_loss(compile_to_circuit(alpha), p));
    }
    report.results.push_back(ck.done());
  }
  return report;
}

}  // namespace semloss
