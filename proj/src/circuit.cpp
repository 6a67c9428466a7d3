#include "semloss/circuit.hpp"

#include <algorithm>
#include <iterator>

namespace semloss {

Circuit::Circuit(std::size_t universe, std::vector<CircuitNode> nodes, std::uint32_t root)
    : universe_(universe), nodes_(std::move(nodes)), root_(root) {
  if (nodes_.empty() || root_ >= nodes_.size()) throw InputError("circuit root out of range");
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    switch (n.kind) {
      case NodeKind::Constant:
        if (!n.children.empty()) throw InputError("constant node with children");
        break;
      case NodeKind::Literal:
        if (n.lit.var == 0 || n.lit.var > universe_)
          throw InputError("literal x" + std::to_string(n.lit.var) + " outside universe");
        if (!n.children.empty()) throw InputError("literal node with children");
        break;
      case NodeKind::Product:
      case NodeKind::Sum:
        for (auto c : n.children)
          if (c >= i) throw InputError("circuit nodes are not in topological order");
        break;
    }
  }
}

std::size_t Circuit::edge_count() const {
  std::size_t e = 0;
  for (const auto& n : nodes_) e += n.children.size();
  return e;
}

bool Circuit::evaluate(const State& s) const {
  if (s.size() < universe_) throw InputError("state shorter than circuit universe");
  std::vector<std::uint8_t> val(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    switch (n.kind) {
      case NodeKind::Constant: val[i] = n.value; break;
      case NodeKind::Literal: val[i] = (s[n.lit.var - 1] != 0) == n.lit.positive; break;
      case NodeKind::Product:
        val[i] = std::all_of(n.children.begin(), n.children.end(), [&](auto c) { return val[c] != 0; });
        break;
      case NodeKind::Sum:
        val[i] = std::any_of(n.children.begin(), n.children.end(), [&](auto c) { return val[c] != 0; });
        break;
    }
  }
  return val[root_] != 0;
}

std::uint32_t CircuitBuilder::push(CircuitNode node) {
  nodes_.push_back(std::move(node));
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

std::uint32_t CircuitBuilder::constant(bool value) {
  auto& slot = constants_[value ? 1 : 0];
  if (slot < 0) {
    CircuitNode n;
    n.kind = NodeKind::Constant;
    n.value = value;
    slot = push(std::move(n));
  }
  return static_cast<std::uint32_t>(slot);
}

std::uint32_t CircuitBuilder::literal(Literal lit) {
  if (lit.var == 0 || lit.var > universe_) throw InputError("literal outside circuit universe");
  std::uint64_t key = (std::uint64_t{lit.var} << 1) | (lit.positive ? 1U : 0U);
  if (auto it = literals_.find(key); it != literals_.end()) return it->second;
  CircuitNode n;
  n.kind = NodeKind::Literal;
  n.lit = lit;
  auto id = push(std::move(n));
  literals_.emplace(key, id);
  return id;
}

std::uint32_t CircuitBuilder::product(std::vector<std::uint32_t> children) {
  CircuitNode n;
  n.kind = NodeKind::Product;
  n.children = std::move(children);
  return push(std::move(n));
}

std::uint32_t CircuitBuilder::sum(std::vector<std::uint32_t> children) {
  CircuitNode n;
  n.kind = NodeKind::Sum;
  n.children = std::move(children);
  return push(std::move(n));
}

Circuit CircuitBuilder::build(std::uint32_t root) const {
  std::vector<bool> live(nodes_.size(), false);
  live[root] = true;
  for (std::size_t i = nodes_.size(); i-- > 0;)
    if (live[i])
      for (auto c : nodes_[i].children) live[c] = true;
  std::vector<std::uint32_t> remap(nodes_.size(), 0);
  std::vector<CircuitNode> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!live[i]) continue;
    CircuitNode n = nodes_[i];
    for (auto& c : n.children) c = remap[c];
    remap[i] = static_cast<std::uint32_t>(out.size());
    out.push_back(std::move(n));
  }
  return Circuit(universe_, std::move(out), remap[root]);
}

Circuit to_circuit(const BddManager& mgr, BddRef root, std::size_t universe) {
  if (universe < mgr.num_vars()) throw InputError("circuit universe smaller than BDD universe");
  CircuitBuilder b(universe);
  std::unordered_map<std::uint32_t, std::uint32_t> memo;

  // Post-order over the reachable BDD nodes so children precede parents.
  std::vector<std::pair<BddRef, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [r, expanded] = stack.back();
    stack.pop_back();
    if (memo.count(r.id)) continue;
    if (BddManager::is_terminal(r)) {
      memo.emplace(r.id, b.constant(r == BddManager::one()));
      continue;
    }
    if (!expanded) {
      stack.push_back({r, true});
      stack.push_back({mgr.high(r), false});
      stack.push_back({mgr.low(r), false});
      continue;
    }
    VarId v = mgr.var(r);
    auto lo = b.product({b.literal(v, false), memo.at(mgr.low(r).id)});
    auto hi = b.product({b.literal(v, true), memo.at(mgr.high(r).id)});
    memo.emplace(r.id, b.sum({lo, hi}));
  }
  return b.build(memo.at(root.id));
}

Circuit compile_to_circuit(const Formula& f, VarOrder order) {
  auto compiled = compile(f, order);
  return to_circuit(compiled.manager, compiled.root, f.universe());
}

namespace {

// BDD of every node; optionally verifies sum children are disjoint on the way.
bool node_bdds(BddManager& mgr, const Circuit& c, std::vector<BddRef>& val, bool check_sums) {
  val.assign(c.size(), BddManager::zero());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& n = c.node(static_cast<std::uint32_t>(i));
    switch (n.kind) {
      case NodeKind::Constant: val[i] = n.value ? BddManager::one() : BddManager::zero(); break;
      case NodeKind::Literal: val[i] = mgr.literal(n.lit); break;
      case NodeKind::Product:
        val[i] = BddManager::one();
        for (auto ch : n.children) val[i] = mgr.apply(BddOp::And, val[i], val[ch]);
        break;
      case NodeKind::Sum:
        if (check_sums)
          for (std::size_t a = 0; a < n.children.size(); ++a)
            for (std::size_t b = a + 1; b < n.children.size(); ++b)
              if (mgr.apply(BddOp::And, val[n.children[a]], val[n.children[b]]) != BddManager::zero())
                return false;
        for (auto ch : n.children) val[i] = mgr.apply(BddOp::Or, val[i], val[ch]);
        break;
    }
  }
  return true;
}

}  // namespace

BddRef circuit_to_bdd(BddManager& mgr, const Circuit& c) {
  std::vector<BddRef> val;
  node_bdds(mgr, c, val, false);
  return val[c.root()];
}

std::vector<std::vector<VarId>> node_variables(const Circuit& c) {
  std::vector<std::vector<VarId>> vars(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& n = c.node(static_cast<std::uint32_t>(i));
    if (n.kind == NodeKind::Literal) {
      vars[i] = {n.lit.var};
      continue;
    }
    std::vector<VarId> acc;
    for (auto ch : n.children) {
      std::vector<VarId> merged;
      std::set_union(acc.begin(), acc.end(), vars[ch].begin(), vars[ch].end(), std::back_inserter(merged));
      acc.swap(merged);
    }
    vars[i] = std::move(acc);
  }
  return vars;
}

bool check_decomposable(const Circuit& c) {
  auto vars = node_variables(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& n = c.node(static_cast<std::uint32_t>(i));
    if (n.kind != NodeKind::Product) continue;
    std::size_t total = 0;
    for (auto ch : n.children) total += vars[ch].size();
    if (total != vars[i].size()) return false;
  }
  return true;
}

bool check_deterministic(const Circuit& c) {
  BddManager mgr(c.universe());
  std::vector<BddRef> val;
  return node_bdds(mgr, c, val, true);
}

BigCount circuit_model_count(const Circuit& c) {
  auto vars = node_variables(c);
  // count[i]: models of node i over its own variable set.
  std::vector<BigCount> count(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& n = c.node(static_cast<std::uint32_t>(i));
    switch (n.kind) {
      case NodeKind::Constant: count[i] = n.value ? 1 : 0; break;
      case NodeKind::Literal: count[i] = 1; break;
      case NodeKind::Product:
        count[i] = 1;
        for (auto ch : n.children) count[i] *= count[ch];
        break;
      case NodeKind::Sum:
        count[i] = 0;
        for (auto ch : n.children) count[i] += count[ch] << (vars[i].size() - vars[ch].size());
        break;
    }
  }
  return count[c.root()] << (c.universe() - vars[c.root()].size());
}

namespace {

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Constant: return "constant";
    case NodeKind::Literal: return "literal";
    case NodeKind::Product: return "product";
    case NodeKind::Sum: return "sum";
  }
  return "?";
}

}  // namespace

nlohmann::json to_json(const Circuit& c) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : c.nodes()) {
    nlohmann::json j;
    j["kind"] = kind_name(n.kind);
    switch (n.kind) {
      case NodeKind::Constant: j["value"] = n.value ? 1 : 0; break;
      case NodeKind::Literal:
        j["var"] = n.lit.var;
        j["polarity"] = n.lit.positive;
        break;
      default: j["children"] = n.children; break;
    }
    nodes.push_back(std::move(j));
  }
  return {{"universe_size", c.universe()}, {"nodes", std::move(nodes)}, {"root", c.root()}};
}

Circuit circuit_from_json(const nlohmann::json& j) {
  try {
    std::vector<CircuitNode> nodes;
    for (const auto& jn : j.at("nodes")) {
      CircuitNode n;
      auto kind = jn.at("kind").get<std::string>();
      if (kind == "constant") {
        n.kind = NodeKind::Constant;
        n.value = jn.at("value").get<int>() != 0;
      } else if (kind == "literal") {
        n.kind = NodeKind::Literal;
        n.lit = {jn.at("var").get<VarId>(), jn.at("polarity").get<bool>()};
      } else if (kind == "product" || kind == "sum") {
        n.kind = kind == "product" ? NodeKind::Product : NodeKind::Sum;
        n.children = jn.at("children").get<std::vector<std::uint32_t>>();
      } else {
        throw InputError("unknown circuit node kind '" + kind + "'");
      }
      nodes.push_back(std::move(n));
    }
    return Circuit(j.at("universe_size").get<std::size_t>(), std::move(nodes), j.at("root").get<std::uint32_t>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad circuit JSON: ") + e.what());
  }
}

}  // namespace semloss
