#include "semloss/encoders.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <unordered_map>

namespace semloss {

Circuit exactly_one(std::size_t n) {
  if (n == 0) throw InputError("exactly-one needs n >= 1");
  CircuitBuilder b(n);
  // none: suffix X_i..X_n all false. one: exactly one of the suffix true.
  std::uint32_t none = b.constant(true);
  std::uint32_t one = b.constant(false);
  for (std::size_t i = n; i >= 1; --i) {
    auto v = static_cast<VarId>(i);
    auto pos = b.literal(v, true), neg = b.literal(v, false);
    auto next_one = b.sum({b.product({neg, one}), b.product({pos, none})});
    none = b.product({neg, none});
    one = next_one;
  }
  return b.build(one);
}

Circuit total_order(std::size_t n) { return compile_to_circuit(total_order_cnf(n)); }

GridSpec::GridSpec(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) throw InputError("grid dimensions must be positive");
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges_.push_back({node(r, c), node(r, c + 1)});
      if (r + 1 < rows) edges_.push_back({node(r, c), node(r + 1, c)});
    }
}

namespace {

// Simple-path frontier search. For edge level k the frontier holds nodes
// touched by an edge < k and by an edge >= k; each carries its degree in the
// partial edge set and a component label.
class PathFrontier {
 public:
  PathFrontier(BddManager& mgr, const GridSpec& g, std::size_t s, std::size_t t)
      : mgr_(mgr), g_(g), s_(s), t_(t), memo_(g.num_edges() + 1) {
    const std::size_t nv = g.num_nodes(), ne = g.num_edges();
    first_.assign(nv, ne);
    last_.assign(nv, 0);
    for (std::size_t e = 0; e < ne; ++e)
      for (auto v : {g.edges()[e].u, g.edges()[e].v}) {
        first_[v] = std::min(first_[v], e);
        last_[v] = std::max(last_[v], e);
      }
    frontier_.resize(ne + 1);
    for (std::size_t k = 0; k <= ne; ++k)
      for (std::size_t v = 0; v < nv; ++v)
        if (first_[v] < k && last_[v] >= k) frontier_[k].push_back(v);
    done_.resize(ne + 1);
    done_[ne] = BddManager::one();
    for (std::size_t k = ne; k-- > 0;) done_[k] = mgr_.make_node(g.edge_var(k), done_[k + 1], BddManager::zero());
  }

  BddRef run() { return visit(0, {}); }

 private:
  struct Slot {
    std::int8_t deg;
    std::int8_t comp;  // -1 while deg == 0
  };
  using Mate = std::vector<Slot>;  // parallel to frontier_[k]

  static std::string key_of(const Mate& m) {
    std::string k;
    k.reserve(m.size() * 2);
    for (auto s : m) {
      k.push_back(static_cast<char>(s.deg));
      k.push_back(static_cast<char>(s.comp));
    }
    return k;
  }

  bool is_end(std::size_t v) const { return v == s_ || v == t_; }

  BddRef visit(std::size_t k, const Mate& mate) {
    if (k == g_.num_edges()) return BddManager::zero();  // path never closed
    auto key = key_of(mate);
    if (auto it = memo_[k].find(key); it != memo_[k].end()) return it->second;
    BddRef lo = step(k, mate, false);
    BddRef hi = step(k, mate, true);
    BddRef r = mgr_.make_node(g_.edge_var(k), lo, hi);
    memo_[k].emplace(std::move(key), r);
    return r;
  }

  BddRef step(std::size_t k, const Mate& mate, bool take) {
    const auto& edge = g_.edges()[k];
    // Working set: current frontier plus the endpoints entering now.
    std::vector<std::size_t> work = frontier_[k];
    std::vector<Slot> slot = mate;
    for (auto v : {edge.u, edge.v})
      if (first_[v] == k) {
        auto pos = std::lower_bound(work.begin(), work.end(), v) - work.begin();
        work.insert(work.begin() + pos, v);
        slot.insert(slot.begin() + pos, Slot{0, -1});
      }
    auto index = [&](std::size_t v) {
      return static_cast<std::size_t>(std::lower_bound(work.begin(), work.end(), v) - work.begin());
    };
    std::size_t iu = index(edge.u), iv = index(edge.v);

    if (take) {
      auto& a = slot[iu];
      auto& b = slot[iv];
      int cap_u = is_end(edge.u) ? 1 : 2, cap_v = is_end(edge.v) ? 1 : 2;
      if (a.deg >= cap_u || b.deg >= cap_v) return BddManager::zero();
      std::int8_t fresh = 0;
      for (auto x : slot) fresh = std::max<std::int8_t>(fresh, static_cast<std::int8_t>(x.comp + 1));
      if (a.comp < 0) a.comp = fresh++;
      if (b.comp < 0) b.comp = fresh++;
      if (a.comp == b.comp) return BddManager::zero();  // cycle
      std::int8_t from = b.comp, to = a.comp;
      for (auto& x : slot)
        if (x.comp == from) x.comp = to;
      ++a.deg;
      ++b.deg;
    }

    // Retire nodes whose last edge is k.
    std::vector<std::int8_t> closing;
    Mate next;
    for (std::size_t i = 0; i < work.size(); ++i) {
      std::size_t v = work[i];
      if (last_[v] != k) {
        next.push_back(slot[i]);
        continue;
      }
      int d = slot[i].deg;
      if (is_end(v) ? d != 1 : (d != 0 && d != 2)) return BddManager::zero();
      if (d > 0) closing.push_back(slot[i].comp);
    }
    for (auto comp : closing) {
      bool open = std::any_of(next.begin(), next.end(), [&](const Slot& x) { return x.comp == comp; });
      if (open) continue;
      // A component left the frontier for good: it must be the whole path.
      bool others = std::any_of(next.begin(), next.end(), [](const Slot& x) { return x.deg > 0; });
      return others ? BddManager::zero() : done_[k + 1];
    }

    // Canonical component labels by first appearance.
    std::vector<std::int8_t> relabel(64, -1);
    std::int8_t counter = 0;
    for (auto& x : next) {
      if (x.comp < 0) continue;
      auto& r = relabel[static_cast<std::size_t>(x.comp)];
      if (r < 0) r = counter++;
      x.comp = r;
    }
    return visit(k + 1, next);
  }

  BddManager& mgr_;
  const GridSpec& g_;
  std::size_t s_, t_;
  std::vector<std::size_t> first_, last_;
  std::vector<std::vector<std::size_t>> frontier_;
  std::vector<BddRef> done_;
  std::vector<std::unordered_map<std::string, BddRef>> memo_;
};

void check_grid(const GridSpec& g) {
  if (g.num_nodes() < 2) throw InputError("degenerate grid: need at least two nodes");
  if (g.rows() > kMaxGridSide || g.cols() > kMaxGridSide)
    throw InputError("grid larger than " + std::to_string(kMaxGridSide) + "x" + std::to_string(kMaxGridSide) +
                     " is not supported by the frontier encoder");
}

}  // namespace

BddRef grid_path_bdd(BddManager& mgr, const GridSpec& g, std::size_t s, std::size_t t) {
  check_grid(g);
  if (mgr.num_vars() != g.num_vars()) throw InputError("manager universe does not match the grid");
  if (s == t || s >= g.num_nodes() || t >= g.num_nodes()) throw InputError("path endpoints must be distinct nodes");
  return PathFrontier(mgr, g, s, t).run();
}

Circuit grid_simple_path(const GridSpec& g) {
  check_grid(g);
  const std::size_t nv = g.num_nodes();
  BddManager mgr(g.num_vars());
  BddRef all = BddManager::zero();
  for (std::size_t s = 0; s < nv; ++s)
    for (std::size_t t = s + 1; t < nv; ++t) {
      BddRef term = grid_path_bdd(mgr, g, s, t);
      for (std::size_t v = nv; v-- > 0;) {
        bool flagged = v == s || v == t;
        term = flagged ? mgr.make_node(g.node_var(v), BddManager::zero(), term)
                       : mgr.make_node(g.node_var(v), term, BddManager::zero());
      }
      all = mgr.apply(BddOp::Or, all, term);
    }
  return to_circuit(mgr, all);
}

bool is_valid_grid_path(const GridSpec& g, const State& x) {
  const std::size_t nv = g.num_nodes();
  if (x.size() < g.num_vars()) throw InputError("assignment shorter than the grid universe");
  std::vector<std::size_t> flagged;
  for (std::size_t v = 0; v < nv; ++v)
    if (x[v]) flagged.push_back(v);
  if (flagged.size() != 2) return false;

  std::vector<int> deg(nv, 0);
  std::vector<std::size_t> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    return parent[v] == v ? v : parent[v] = find(parent[v]);
  };
  std::size_t used = 0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (!x[nv + e]) continue;
    auto [u, v] = g.edges()[e];
    ++deg[u];
    ++deg[v];
    ++used;
    auto ru = find(u), rv = find(v);
    if (ru == rv) return false;  // cycle
    parent[ru] = rv;
  }
  if (used == 0) return false;
  std::size_t odd = 0, touched = 0;
  for (std::size_t v = 0; v < nv; ++v) {
    if (deg[v] > 2) return false;
    if (deg[v] == 1) {
      ++odd;
      if (v != flagged[0] && v != flagged[1]) return false;
    }
    if (deg[v] > 0) ++touched;
  }
  // Forest with `touched` nodes and `used` edges is connected iff used == touched - 1.
  return odd == 2 && used + 1 == touched;
}

Circuit condition(const Circuit& c, const Evidence& e) {
  for (auto [v, _] : e)
    if (v == 0 || v > c.universe()) throw InputError("evidence variable outside circuit universe");
  CircuitBuilder b(c.universe());
  std::vector<std::uint32_t> map(c.size());
  // Constant value of each rebuilt node, -1 when not constant.
  std::vector<int> konst(c.size(), -1);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& n = c.node(static_cast<std::uint32_t>(i));
    switch (n.kind) {
      case NodeKind::Constant:
        konst[i] = n.value;
        map[i] = b.constant(n.value);
        break;
      case NodeKind::Literal:
        if (auto it = e.find(n.lit.var); it != e.end()) {
          konst[i] = it->second == n.lit.positive;
          map[i] = b.constant(konst[i] != 0);
        } else {
          map[i] = b.literal(n.lit);
        }
        break;
      case NodeKind::Product:
      case NodeKind::Sum: {
        const bool prod = n.kind == NodeKind::Product;
        const int absorbing = prod ? 0 : 1;
        const int neutral = prod ? 1 : 0;
        std::vector<std::uint32_t> kids;
        bool absorbed = false;
        for (auto ch : n.children) {
          if (konst[ch] == absorbing && prod) {
            absorbed = true;
            break;
          }
          if (konst[ch] == neutral) continue;
          kids.push_back(map[ch]);
        }
        if (absorbed) {
          konst[i] = 0;
          map[i] = b.constant(false);
        } else if (kids.empty()) {
          konst[i] = neutral;
          map[i] = b.constant(neutral != 0);
        } else if (kids.size() == 1) {
          map[i] = kids[0];
          konst[i] = -1;
          for (auto ch : n.children)
            if (map[ch] == kids[0]) konst[i] = konst[ch];
        } else {
          map[i] = prod ? b.product(std::move(kids)) : b.sum(std::move(kids));
        }
        break;
      }
    }
  }
  return b.build(map[c.root()]);
}

Circuit simplify(const Circuit& c) { return condition(c, {}); }

ProbVector clamp_evidence(const ProbVector& p, const Evidence& e) {
  ProbVector q = p;
  for (auto [v, val] : e) {
    if (v == 0 || v > static_cast<std::size_t>(q.size())) throw InputError("evidence variable outside vector");
    q[v - 1] = val ? 1.0 : 0.0;
  }
  return q;
}

}  // namespace semloss
