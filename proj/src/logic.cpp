#include "semloss/logic.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <charconv>
#include <sstream>

namespace semloss {

Formula Formula::make(Kind kind, Literal lit, std::vector<Formula> children) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->lit = lit;
  node->max_var = kind == Kind::Lit ? lit.var : 0;
  for (const auto& c : children) node->max_var = std::max(node->max_var, c.max_var());
  node->children = std::move(children);
  return Formula(std::move(node));
}

Formula Formula::constant(bool value) {
  return make(value ? Kind::True : Kind::False, {}, {});
}

Formula Formula::literal(Literal lit) {
  if (lit.var == 0) throw InputError("variable indices are 1-based");
  return make(Kind::Lit, lit, {});
}

Formula Formula::negation(Formula child) {
  return make(Kind::Not, {}, {std::move(child)});
}

Formula Formula::conjunction(std::vector<Formula> children) {
  if (children.empty()) throw InputError("empty conjunction");
  return make(Kind::And, {}, std::move(children));
}

Formula Formula::disjunction(std::vector<Formula> children) {
  if (children.empty()) throw InputError("empty disjunction");
  return make(Kind::Or, {}, std::move(children));
}

std::size_t Formula::universe() const {
  return std::max<std::size_t>(declared_, max_var());
}

Formula Formula::with_universe(std::size_t declared) const {
  Formula f = *this;
  f.declared_ = declared;
  return f;
}

namespace {

void write_sexpr(const Formula& f, std::ostringstream& os) {
  switch (f.kind()) {
    case Formula::Kind::True: os << "true"; return;
    case Formula::Kind::False: os << "false"; return;
    case Formula::Kind::Lit:
      if (f.lit().positive)
        os << 'x' << f.lit().var;
      else
        os << "(not x" << f.lit().var << ')';
      return;
    case Formula::Kind::Not:
      os << "(not ";
      write_sexpr(f.children()[0], os);
      os << ')';
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      os << (f.kind() == Formula::Kind::And ? "(and" : "(or");
      for (const auto& c : f.children()) {
        os << ' ';
        write_sexpr(c, os);
      }
      os << ')';
      return;
  }
}

bool eval_node(const Formula& f, const State& s) {
  switch (f.kind()) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Lit: return (s[f.lit().var - 1] != 0) == f.lit().positive;
    case Formula::Kind::Not: return !eval_node(f.children()[0], s);
    case Formula::Kind::And:
      return std::all_of(f.children().begin(), f.children().end(),
                         [&](const Formula& c) { return eval_node(c, s); });
    case Formula::Kind::Or:
      return std::any_of(f.children().begin(), f.children().end(),
                         [&](const Formula& c) { return eval_node(c, s); });
  }
  return false;
}

template <typename Fn>
Formula map_literals(const Formula& f, const Fn& fn) {
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: return f;
    case Formula::Kind::Lit: return Formula::literal(fn(f.lit()));
    case Formula::Kind::Not: return Formula::negation(map_literals(f.children()[0], fn));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.children().size());
      for (const auto& c : f.children()) kids.push_back(map_literals(c, fn));
      return f.kind() == Formula::Kind::And ? Formula::conjunction(std::move(kids))
                                            : Formula::disjunction(std::move(kids));
    }
  }
  return f;
}

// Splits on whitespace, keeping track of nothing but tokens.
std::vector<std::string_view> tokens_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_int(std::string_view tok, long long& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

std::string Formula::to_sexpr() const {
  std::ostringstream os;
  write_sexpr(*this, os);
  return os.str();
}

Formula parse_dimacs(std::string_view text) {
  std::size_t line_no = 0;
  long long declared_vars = -1, declared_clauses = -1;
  std::vector<Formula> clauses;
  std::vector<Formula> pending;
  std::size_t pending_line = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    auto toks = tokens_of(line);
    if (toks.empty() || toks[0][0] == 'c' || toks[0] == "%") continue;
    if (toks[0] == "p") {
      if (declared_vars >= 0) throw ParseError(line_no, "duplicate problem line");
      if (toks.size() != 4 || toks[1] != "cnf" || !parse_int(toks[2], declared_vars) ||
          !parse_int(toks[3], declared_clauses) || declared_vars < 0 || declared_clauses < 0)
        throw ParseError(line_no, "malformed header, expected 'p cnf <vars> <clauses>'");
      continue;
    }
    if (declared_vars < 0) throw ParseError(line_no, "clause before 'p cnf' header");
    for (auto tok : toks) {
      long long v = 0;
      if (!parse_int(tok, v)) throw ParseError(line_no, "bad literal '" + std::string(tok) + "'");
      if (v == 0) {
        if (pending.empty())
          clauses.push_back(Formula::constant(false));
        else
          clauses.push_back(Formula::disjunction(std::move(pending)));
        pending.clear();
        continue;
      }
      if (std::llabs(v) > declared_vars)
        throw ParseError(line_no, "literal " + std::to_string(v) + " exceeds declared variable count " +
                                      std::to_string(declared_vars));
      if (pending.empty()) pending_line = line_no;
      pending.push_back(Formula::literal(static_cast<VarId>(std::llabs(v)), v > 0));
    }
  }
  if (declared_vars < 0) throw ParseError(line_no, "missing 'p cnf' header");
  if (!pending.empty()) throw ParseError(pending_line, "clause is missing its 0 terminator");
  if (static_cast<long long>(clauses.size()) != declared_clauses)
    throw ParseError(line_no, "header declares " + std::to_string(declared_clauses) + " clauses, found " +
                                  std::to_string(clauses.size()));

  auto n = static_cast<std::size_t>(declared_vars);
  if (clauses.empty()) return Formula::constant(true).with_universe(n);
  return Formula::conjunction(std::move(clauses)).with_universe(n);
}

bool eval_state(const Formula& f, const State& s) {
  if (s.size() < f.universe())
    throw InputError("state covers " + std::to_string(s.size()) + " variables, formula needs " +
                     std::to_string(f.universe()));
  return eval_node(f, s);
}

std::vector<State> enumerate_models(const Formula& f) {
  const std::size_t n = f.universe();
  if (n > kMaxEnumerationVars)
    throw InputError("enumeration limited to " + std::to_string(kMaxEnumerationVars) + " variables, got " +
                     std::to_string(n));
  std::vector<State> models;
  State s(n, 0);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    for (std::size_t i = 0; i < n; ++i) s[i] = (bits >> (n - 1 - i)) & 1U;
    if (eval_node(f, s)) models.push_back(s);
  }
  return models;
}

void check_probabilities(const ProbVector& p, std::size_t n) {
  if (static_cast<std::size_t>(p.size()) != n)
    throw InputError("probability vector has length " + std::to_string(p.size()) + ", expected " +
                     std::to_string(n));
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!(p[i] >= 0.0 && p[i] <= 1.0))
      throw InputError("probability p" + std::to_string(i + 1) + " outside [0,1]");
}

double brute_force_wmc(const Formula& f, const ProbVector& p) {
  check_probabilities(p, f.universe());
  double total = 0.0;
  for (const auto& x : enumerate_models(f)) {
    double w = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) w *= x[i] ? p[i] : 1.0 - p[i];
    total += w;
  }
  return total;
}

Formula mirror(const Formula& f) {
  return map_literals(f, [](Literal l) { return ~l; }).with_universe(f.universe());
}

Formula rename(const Formula& f, std::span<const VarId> perm) {
  if (perm.size() < f.max_var()) throw InputError("permutation does not cover the formula's variables");
  return map_literals(f, [&](Literal l) { return Literal{perm[l.var - 1], l.positive}; })
      .with_universe(f.universe());
}

Formula exactly_one_cnf(std::span<const VarId> vars) {
  if (vars.empty()) throw InputError("exactly-one needs at least one variable");
  std::vector<Formula> clauses;
  std::vector<Formula> at_least;
  for (VarId v : vars) at_least.push_back(Formula::literal(v));
  clauses.push_back(Formula::disjunction(std::move(at_least)));
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = i + 1; j < vars.size(); ++j)
      clauses.push_back(Formula::literal(vars[i], false) || Formula::literal(vars[j], false));
  return Formula::conjunction(std::move(clauses));
}

Formula exactly_one_dnf(std::span<const VarId> vars) {
  if (vars.empty()) throw InputError("exactly-one needs at least one variable");
  std::vector<Formula> terms;
  for (VarId hot : vars) {
    std::vector<Formula> lits;
    for (VarId v : vars) lits.push_back(Formula::literal(v, v == hot));
    terms.push_back(Formula::conjunction(std::move(lits)));
  }
  return Formula::disjunction(std::move(terms));
}

Formula total_order_cnf(std::size_t n) {
  if (n == 0) throw InputError("total order needs n >= 1");
  std::vector<Formula> parts;
  std::vector<VarId> group(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) group[j] = static_cast<VarId>(i * n + j + 1);
    parts.push_back(exactly_one_cnf(group));
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) group[i] = static_cast<VarId>(i * n + j + 1);
    parts.push_back(exactly_one_cnf(group));
  }
  return Formula::conjunction(std::move(parts)).with_universe(n * n);
}

Formula state_formula(const State& s) {
  if (s.empty()) return Formula::constant(true);
  std::vector<Formula> lits;
  for (std::size_t i = 0; i < s.size(); ++i) lits.push_back(Formula::literal(static_cast<VarId>(i + 1), s[i] != 0));
  return Formula::conjunction(std::move(lits)).with_universe(s.size());
}

}  // namespace semloss
