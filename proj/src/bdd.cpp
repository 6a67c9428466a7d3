#include "semloss/bdd.hpp"

#include <algorithm>
#include <unordered_set>

namespace semloss {

BddManager::BddManager(std::size_t num_vars, std::vector<VarId> order, std::size_t node_cap)
    : num_vars_(num_vars), node_cap_(node_cap), order_(std::move(order)) {
  if (order_.empty()) {
    order_.resize(num_vars_);
    for (std::size_t k = 0; k < num_vars_; ++k) order_[k] = static_cast<VarId>(k + 1);
  }
  if (order_.size() != num_vars_) throw InputError("variable order must list every variable exactly once");
  level_.assign(num_vars_ + 1, num_vars_);
  std::vector<bool> seen(num_vars_ + 1, false);
  for (std::size_t k = 0; k < num_vars_; ++k) {
    VarId v = order_[k];
    if (v == 0 || v > num_vars_ || seen[v]) throw InputError("variable order is not a permutation of 1..n");
    seen[v] = true;
    level_[v] = k;
  }
  nodes_.push_back({0, zero(), zero()});
  nodes_.push_back({0, one(), one()});
}

void BddManager::check_var(VarId v) const {
  if (v == 0 || v > num_vars_)
    throw InputError("variable x" + std::to_string(v) + " outside manager universe of " + std::to_string(num_vars_));
}

BddRef BddManager::make_node(VarId v, BddRef low, BddRef high) {
  check_var(v);
  if (level_[v] >= level(low) || level_[v] >= level(high))
    throw InputError("BDD node children must sit below x" + std::to_string(v) + " in the order");
  if (low == high) return low;
  Key key{(std::uint64_t{v} << 32) | low.id, high.id};
  if (auto it = unique_.find(key); it != unique_.end()) return it->second;
  if (nodes_.size() >= node_cap_)
    throw ComputeError("BDD blowup: node table exceeded cap of " + std::to_string(node_cap_) + " nodes");
  BddRef r{static_cast<std::uint32_t>(nodes_.size())};
  nodes_.push_back({v, low, high});
  unique_.emplace(key, r);
  return r;
}

BddRef BddManager::literal(VarId v, bool positive) {
  check_var(v);
  return positive ? make_node(v, zero(), one()) : make_node(v, one(), zero());
}

BddRef BddManager::apply(BddOp op, BddRef a, BddRef b) {
  switch (op) {
    case BddOp::And:
      if (a == zero() || b == zero()) return zero();
      if (a == one()) return b;
      if (b == one() || a == b) return a;
      break;
    case BddOp::Or:
      if (a == one() || b == one()) return one();
      if (a == zero()) return b;
      if (b == zero() || a == b) return a;
      break;
    case BddOp::Xor:
      if (a == b) return zero();
      if (a == zero()) return b;
      if (b == zero()) return a;
      break;
  }
  if (a.id > b.id) std::swap(a, b);  // every op is commutative

  Key key{(std::uint64_t{static_cast<std::uint8_t>(op)} << 32) | a.id, b.id};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  std::size_t la = level(a), lb = level(b);
  std::size_t top = std::min(la, lb);
  VarId v = order_[top];
  BddRef a0 = la == top ? low(a) : a, a1 = la == top ? high(a) : a;
  BddRef b0 = lb == top ? low(b) : b, b1 = lb == top ? high(b) : b;
  BddRef lo = apply(op, a0, b0);
  BddRef hi = apply(op, a1, b1);
  BddRef r = make_node(v, lo, hi);
  cache_.emplace(key, r);
  return r;
}

BddRef BddManager::negate(BddRef a) { return apply(BddOp::Xor, a, one()); }

std::size_t BddManager::reachable_size(BddRef root) const {
  std::unordered_set<std::uint32_t> seen;
  std::vector<BddRef> stack{root};
  while (!stack.empty()) {
    BddRef r = stack.back();
    stack.pop_back();
    if (!seen.insert(r.id).second || is_terminal(r)) continue;
    stack.push_back(low(r));
    stack.push_back(high(r));
  }
  return seen.size();
}

BddRef bdd_apply(BddManager& mgr, BddOp op, BddRef a, BddRef b) { return mgr.apply(op, a, b); }

std::vector<VarId> first_occurrence_order(const Formula& f) {
  const std::size_t n = f.universe();
  std::vector<VarId> order;
  std::vector<bool> seen(n + 1, false);
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (g.kind() == Formula::Kind::Lit) {
      if (!seen[g.lit().var]) {
        seen[g.lit().var] = true;
        order.push_back(g.lit().var);
      }
      continue;
    }
    auto kids = g.children();
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  for (VarId v = 1; v <= n; ++v)
    if (!seen[v]) order.push_back(v);
  return order;
}

namespace {

struct PtrHash {
  std::size_t operator()(const std::pair<const void*, bool>& k) const {
    return std::hash<const void*>()(k.first) ^ static_cast<std::size_t>(k.second);
  }
};

class FormulaCompiler {
 public:
  explicit FormulaCompiler(BddManager& mgr) : mgr_(mgr) {}

  BddRef run(const Formula& f, bool negated) {
    auto key = std::make_pair(f.id(), negated);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    BddRef r = visit(f, negated);
    memo_.emplace(key, r);
    return r;
  }

 private:
  BddRef visit(const Formula& f, bool negated) {
    switch (f.kind()) {
      case Formula::Kind::True: return negated ? BddManager::zero() : BddManager::one();
      case Formula::Kind::False: return negated ? BddManager::one() : BddManager::zero();
      case Formula::Kind::Lit: return mgr_.literal(f.lit().var, f.lit().positive != negated);
      case Formula::Kind::Not: return run(f.children()[0], !negated);
      case Formula::Kind::And:
      case Formula::Kind::Or: {
        // De Morgan: a negated conjunction is a disjunction of negations.
        bool conj = (f.kind() == Formula::Kind::And) != negated;
        BddOp op = conj ? BddOp::And : BddOp::Or;
        BddRef absorbing = conj ? BddManager::zero() : BddManager::one();
        BddRef acc = conj ? BddManager::one() : BddManager::zero();
        for (const auto& c : f.children()) {
          acc = mgr_.apply(op, acc, run(c, negated));
          if (acc == absorbing) break;
        }
        return acc;
      }
    }
    return BddManager::zero();
  }

  BddManager& mgr_;
  std::unordered_map<std::pair<const void*, bool>, BddRef, PtrHash> memo_;
};

}  // namespace

BddRef compile_into(BddManager& mgr, const Formula& f) {
  if (f.max_var() > mgr.num_vars())
    throw InputError("formula mentions x" + std::to_string(f.max_var()) + " beyond the manager universe");
  return FormulaCompiler(mgr).run(f, false);
}

CompiledFormula compile(const Formula& f, std::vector<VarId> order, std::size_t node_cap) {
  BddManager mgr(f.universe(), std::move(order), node_cap);
  BddRef root = compile_into(mgr, f);
  return {std::move(mgr), root};
}

CompiledFormula compile(const Formula& f, VarOrder order, std::size_t node_cap) {
  return compile(f, order == VarOrder::Natural ? std::vector<VarId>{} : first_occurrence_order(f), node_cap);
}

BigCount model_count(const BddManager& mgr, BddRef root, std::size_t universe_size) {
  if (universe_size < mgr.num_vars()) throw InputError("universe smaller than the manager's variable set");
  std::unordered_map<std::uint32_t, BigCount> memo;
  const std::size_t n = mgr.num_vars();
  // count(r): assignments to the variables at levels >= level(r).
  std::function<BigCount(BddRef)> count = [&](BddRef r) -> BigCount {
    if (r == BddManager::zero()) return 0;
    if (r == BddManager::one()) return 1;
    if (auto it = memo.find(r.id); it != memo.end()) return it->second;
    std::size_t l = mgr.level(r);
    BddRef lo = mgr.low(r), hi = mgr.high(r);
    BigCount c = (count(lo) << (mgr.level(lo) - l - 1)) + (count(hi) << (mgr.level(hi) - l - 1));
    memo.emplace(r.id, c);
    return c;
  };
  BigCount total = count(root) << mgr.level(root);
  return total << (universe_size - n);
}

void for_each_path(const BddManager& mgr, BddRef root,
                   const std::function<void(const std::vector<std::int8_t>&)>& fn) {
  std::vector<std::int8_t> partial(mgr.num_vars(), -1);
  std::function<void(BddRef)> walk = [&](BddRef r) {
    if (r == BddManager::zero()) return;
    if (r == BddManager::one()) {
      fn(partial);
      return;
    }
    VarId v = mgr.var(r);
    partial[v - 1] = 0;
    walk(mgr.low(r));
    partial[v - 1] = 1;
    walk(mgr.high(r));
    partial[v - 1] = -1;
  };
  walk(root);
}

}  // namespace semloss
