#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "semloss/logic.hpp"

namespace semloss {

using BigCount = boost::multiprecision::cpp_int;

// Handle into a BddManager's node table. Ids 0 and 1 are the terminals.
struct BddRef {
  std::uint32_t id = 0;
  bool operator==(const BddRef&) const = default;
};

enum class BddOp : std::uint8_t { And, Or, Xor };

inline constexpr std::size_t kDefaultNodeCap = 10'000'000;

// Hash-consed reduced ordered BDD over variables 1..num_vars.
//
// Nodes are never freed; a manager lives for one compilation. Variable levels
// strictly increase along every root-to-terminal path and no node has
// low == high.
class BddManager {
 public:
  // `order[k]` is the variable tested at level k. Empty means natural order.
  explicit BddManager(std::size_t num_vars, std::vector<VarId> order = {},
                      std::size_t node_cap = kDefaultNodeCap);

  static constexpr BddRef zero() { return {0}; }
  static constexpr BddRef one() { return {1}; }
  static bool is_terminal(BddRef r) { return r.id < 2; }

  std::size_t num_vars() const { return num_vars_; }
  const std::vector<VarId>& order() const { return order_; }
  std::size_t level_of(VarId v) const { return level_[v]; }
  // Terminals sit at level num_vars.
  std::size_t level(BddRef r) const { return is_terminal(r) ? num_vars_ : level_[nodes_[r.id].var]; }

  VarId var(BddRef r) const { return nodes_[r.id].var; }
  BddRef low(BddRef r) const { return nodes_[r.id].low; }
  BddRef high(BddRef r) const { return nodes_[r.id].high; }

  // Total nodes allocated, terminals included.
  std::size_t size() const { return nodes_.size(); }

  BddRef literal(VarId v, bool positive = true);
  BddRef literal(Literal l) { return literal(l.var, l.positive); }

  // Canonical node for (v ? high : low). Both children must sit strictly
  // below v in the order.
  BddRef make_node(VarId v, BddRef low, BddRef high);

  BddRef apply(BddOp op, BddRef a, BddRef b);
  BddRef negate(BddRef a);

  // Nodes reachable from root, terminals included.
  std::size_t reachable_size(BddRef root) const;

 private:
  struct Node {
    VarId var;
    BddRef low, high;
  };
  struct Key {
    std::uint64_t a, b;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = k.a * 0x9E3779B97F4A7C15ULL;
      h ^= k.b + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };

  void check_var(VarId v) const;

  std::size_t num_vars_;
  std::size_t node_cap_;
  std::vector<VarId> order_;
  std::vector<std::size_t> level_;  // indexed by VarId
  std::vector<Node> nodes_;
  std::unordered_map<Key, BddRef, KeyHash> unique_;
  std::unordered_map<Key, BddRef, KeyHash> cache_;
};

BddRef bdd_apply(BddManager& mgr, BddOp op, BddRef a, BddRef b);

enum class VarOrder : std::uint8_t { Natural, FirstOccurrence };

// Variables by first occurrence in a preorder walk of f, then the
// unmentioned ones in index order.
std::vector<VarId> first_occurrence_order(const Formula& f);

struct CompiledFormula {
  BddManager manager;
  BddRef root;
};

CompiledFormula compile(const Formula& f, std::vector<VarId> order = {},
                        std::size_t node_cap = kDefaultNodeCap);
CompiledFormula compile(const Formula& f, VarOrder order, std::size_t node_cap = kDefaultNodeCap);

// Compile into an existing manager. Negations are pushed to the literals.
BddRef compile_into(BddManager& mgr, const Formula& f);

// Satisfying assignments over variables 1..universe_size; universe_size must
// be at least mgr.num_vars().
BigCount model_count(const BddManager& mgr, BddRef root, std::size_t universe_size);

// Calls `fn` once per root-to-one path with the partial assignment along it
// (-1 for untested variables). Exponential; meant for small oracles.
void for_each_path(const BddManager& mgr, BddRef root,
                   const std::function<void(const std::vector<std::int8_t>&)>& fn);

}  // namespace semloss
