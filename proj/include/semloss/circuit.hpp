#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "semloss/bdd.hpp"
#include "semloss/logic.hpp"

namespace semloss {

enum class NodeKind : std::uint8_t { Constant, Literal, Product, Sum };

struct CircuitNode {
  NodeKind kind = NodeKind::Constant;
  bool value = false;  // Constant
  Literal lit;         // Literal
  std::vector<std::uint32_t> children;

  bool operator==(const CircuitNode&) const = default;
};

// Immutable arithmetic circuit, nodes in topological order (children before
// parents). Intended to be deterministic and decomposable; the constructor
// only checks the DAG shape, see check_decomposable / check_deterministic.
class Circuit {
 public:
  Circuit(std::size_t universe, std::vector<CircuitNode> nodes, std::uint32_t root);

  std::size_t universe() const { return universe_; }
  const std::vector<CircuitNode>& nodes() const { return nodes_; }
  const CircuitNode& node(std::uint32_t i) const { return nodes_[i]; }
  std::uint32_t root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const;

  // Boolean semantics: products are AND, sums are OR.
  bool evaluate(const State& s) const;

  bool operator==(const Circuit&) const = default;

 private:
  std::size_t universe_;
  std::vector<CircuitNode> nodes_;
  std::uint32_t root_;
};

// Appends nodes in topological order, sharing constant and literal leaves.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::size_t universe) : universe_(universe) {}

  std::uint32_t constant(bool value);
  std::uint32_t literal(Literal lit);
  std::uint32_t literal(VarId v, bool positive) { return literal(Literal{v, positive}); }
  std::uint32_t product(std::vector<std::uint32_t> children);
  std::uint32_t sum(std::vector<std::uint32_t> children);

  // Keeps only nodes reachable from root, renumbered in topological order.
  Circuit build(std::uint32_t root) const;

 private:
  std::uint32_t push(CircuitNode node);

  std::size_t universe_;
  std::vector<CircuitNode> nodes_;
  std::int64_t constants_[2] = {-1, -1};
  std::unordered_map<std::uint64_t, std::uint32_t> literals_;
};

// Each decision node (v, lo, hi) becomes
// sum(product(not v, lo'), product(v, hi')); terminals become constants.
Circuit to_circuit(const BddManager& mgr, BddRef root, std::size_t universe);
inline Circuit to_circuit(const BddManager& mgr, BddRef root) { return to_circuit(mgr, root, mgr.num_vars()); }

Circuit compile_to_circuit(const Formula& f, VarOrder order = VarOrder::Natural);

// Boolean function of the circuit rebuilt as a BDD in `mgr`.
BddRef circuit_to_bdd(BddManager& mgr, const Circuit& c);

// Sorted variable set of every node.
std::vector<std::vector<VarId>> node_variables(const Circuit& c);

// Children of every product mention pairwise disjoint variables.
bool check_decomposable(const Circuit& c);
// Children of every sum are pairwise mutually exclusive. Uses BDDs, so keep
// the universe small.
bool check_deterministic(const Circuit& c);

// Exact count of satisfying states over the circuit's universe. Requires a
// deterministic, decomposable circuit.
BigCount circuit_model_count(const Circuit& c);

nlohmann::json to_json(const Circuit& c);
Circuit circuit_from_json(const nlohmann::json& j);

}  // namespace semloss
