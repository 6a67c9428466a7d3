#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "semloss/circuit.hpp"

namespace semloss {

// Linear chain circuit over X1..Xn accepting exactly the one-hot states.
Circuit exactly_one(std::size_t n);

// n*n row-major indicators X_{i*n+j+1} = "item i at position j"; models are
// the permutation matrices.
Circuit total_order(std::size_t n);

// 4-neighbour lattice. Nodes are numbered row-major; edges are numbered by
// visiting nodes row-major and emitting the right edge, then the down edge.
class GridSpec {
 public:
  struct Edge {
    std::size_t u, v;
  };

  GridSpec(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t num_nodes() const { return rows_ * cols_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t node(std::size_t r, std::size_t c) const { return r * cols_ + c; }

  // Constraint variables: node indicators first, then edges.
  VarId node_var(std::size_t v) const { return static_cast<VarId>(v + 1); }
  VarId edge_var(std::size_t e) const { return static_cast<VarId>(num_nodes() + e + 1); }
  std::size_t num_vars() const { return num_nodes() + num_edges(); }

 private:
  std::size_t rows_, cols_;
  std::vector<Edge> edges_;
};

inline constexpr std::size_t kMaxGridSide = 6;

// BDD over g's edge variables (inside a manager whose universe is
// g.num_vars()) accepting exactly the edge sets forming a simple s-t path.
// Built edge by edge from frontier states.
BddRef grid_path_bdd(BddManager& mgr, const GridSpec& g, std::size_t s, std::size_t t);

// Disjunction over unordered node pairs {s,t} of
// [exactly s and t flagged among the node indicators] and [simple s-t path].
Circuit grid_simple_path(const GridSpec& g);

// True iff the edge set is a simple path whose two ends are exactly the
// flagged nodes. Graph inspection, independent of the compiled constraint.
bool is_valid_grid_path(const GridSpec& g, const State& assignment);

// Fixed truth values for a subset of variables.
using Evidence = std::map<VarId, bool>;

// Replaces fixed literals by constants and folds constants away.
Circuit condition(const Circuit& c, const Evidence& e);

// condition() with no evidence: the canonical constant-free form.
Circuit simplify(const Circuit& c);

// p with the evidence variables clamped to 0/1.
ProbVector clamp_evidence(const ProbVector& p, const Evidence& e);

}  // namespace semloss
