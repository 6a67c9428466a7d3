#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace semloss {

// Error taxonomy shared by every module. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input (files, dimensions, value ranges).
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Failures while computing: compilation blowup, unsatisfiable evidence,
// divergence during training.
class ComputeError : public Error {
 public:
  using Error::Error;
};

// Variables are 1-based, X1..Xn.
using VarId = std::uint32_t;

struct Literal {
  VarId var = 0;
  bool positive = true;

  Literal operator~() const { return {var, !positive}; }
  bool operator==(const Literal&) const = default;
};

// Total assignment; element i holds the value of X_{i+1}.
using State = std::vector<std::uint8_t>;

// Neural output vector; element i is the probability of X_{i+1}.
using ProbVector = Eigen::VectorXd;

// Immutable propositional sentence. Nodes are shared, so copies are cheap.
class Formula {
 public:
  enum class Kind : std::uint8_t { True, False, Lit, Not, And, Or };

  static Formula constant(bool value);
  static Formula literal(Literal lit);
  static Formula literal(VarId var, bool positive = true) { return literal(Literal{var, positive}); }
  static Formula negation(Formula child);
  // Both require a nonempty child list.
  static Formula conjunction(std::vector<Formula> children);
  static Formula disjunction(std::vector<Formula> children);

  Kind kind() const { return node_->kind; }
  Literal lit() const { return node_->lit; }
  std::span<const Formula> children() const { return node_->children; }

  // Largest variable index mentioned anywhere in the tree (0 if none).
  VarId max_var() const { return node_->max_var; }

  // Universe size: declared size, widened to cover every mentioned variable.
  std::size_t universe() const;
  Formula with_universe(std::size_t declared) const;

  std::string to_sexpr() const;

  // Identity of the shared node, for memoization.
  const void* id() const { return node_.get(); }

 private:
  struct Node {
    Kind kind;
    Literal lit;
    std::vector<Formula> children;
    VarId max_var = 0;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Kind kind, Literal lit, std::vector<Formula> children);

  std::shared_ptr<const Node> node_;
  std::size_t declared_ = 0;
};

// Operator sugar for building formulas in code and tests.
inline Formula operator!(const Formula& f) { return Formula::negation(f); }
inline Formula operator&&(const Formula& a, const Formula& b) { return Formula::conjunction({a, b}); }
inline Formula operator||(const Formula& a, const Formula& b) { return Formula::disjunction({a, b}); }

Formula parse_dimacs(std::string_view text);

// S-expression syntax: (and f...), (or f...), (not f), x<k>, true, false.
// ';' starts a comment running to end of line.
Formula parse_sexpr(std::string_view text);

bool eval_state(const Formula& f, const State& s);

inline constexpr std::size_t kMaxEnumerationVars = 24;

// All satisfying states over f.universe(), in ascending lexicographic order
// with X1 as the most significant position.
std::vector<State> enumerate_models(const Formula& f);

// Sum of state probabilities over the models of f.
double brute_force_wmc(const Formula& f, const ProbVector& p);

// Throws InputError unless p has length n and every entry lies in [0,1].
void check_probabilities(const ProbVector& p, std::size_t n);

// Syntactic transformations used by the symmetry axioms.
Formula mirror(const Formula& f);                                   // X_i -> not X_i
Formula rename(const Formula& f, std::span<const VarId> perm);       // X_i -> X_{perm[i-1]}

// Clause encoding: one at-least-one clause plus pairwise at-most-one clauses.
Formula exactly_one_cnf(std::span<const VarId> vars);
// Disjunction of the n one-hot terms.
Formula exactly_one_dnf(std::span<const VarId> vars);
// Row and column exactly-one over an n x n row-major indicator matrix.
Formula total_order_cnf(std::size_t n);
// Conjunction of literals fixing every variable to its value in s.
Formula state_formula(const State& s);

}  // namespace semloss
