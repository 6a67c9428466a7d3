#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "semloss/circuit.hpp"

namespace semloss {

// Semantic loss is -K * ln WMC. Only K = 1 with the natural log is used in
// this project; K is kept as a parameter so the scaling is explicit.
struct LossConfig {
  double scale = 1.0;      // K, must be > 0
  double epsilon = 1e-30;  // floor applied to WMC when floor_unsat is set
  // When false an unsatisfiable WMC (exactly 0) yields +inf loss and the
  // gradient throws; when true WMC is floored at epsilon instead.
  bool floor_unsat = false;
};

// Per-node values of one forward and one backward pass, both in log space.
struct EvalTrace {
  std::vector<double> log_value;    // ln v_n
  std::vector<double> log_partial;  // ln dWMC/dv_n
  double log_wmc = -std::numeric_limits<double>::infinity();
};

// Upward pass in linear space; the reference implementation.
template <typename Scalar>
Scalar wmc_linear(const Circuit& c, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& p) {
  std::vector<Scalar> val(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& n = c.node(static_cast<std::uint32_t>(i));
    switch (n.kind) {
      case NodeKind::Constant: val[i] = n.value ? Scalar(1) : Scalar(0); break;
      case NodeKind::Literal: {
        Scalar pi = p[n.lit.var - 1];
        val[i] = n.lit.positive ? pi : Scalar(1) - pi;
        break;
      }
      case NodeKind::Product:
        val[i] = Scalar(1);
        for (auto ch : n.children) val[i] *= val[ch];
        break;
      case NodeKind::Sum:
        val[i] = Scalar(0);
        for (auto ch : n.children) val[i] += val[ch];
        break;
    }
  }
  return val[c.root()];
}

// Weighted model count: x_i -> p_i, not x_i -> 1 - p_i.
double wmc(const Circuit& c, const ProbVector& p);

// ln WMC via a log-sum-exp forward pass.
double log_wmc(const Circuit& c, const ProbVector& p);

// Forward and backward passes. The backward pass is skipped when WMC is 0.
EvalTrace trace(const Circuit& c, const ProbVector& p);

double semantic_loss(const Circuit& c, const ProbVector& p, const LossConfig& cfg = {});

// d loss / d p_i for every variable of the universe.
Eigen::VectorXd semantic_loss_grad(const Circuit& c, const ProbVector& p, const LossConfig& cfg = {});

struct LossWithGrad {
  double value;
  Eigen::VectorXd grad;
};

// Value and gradient from a single forward/backward pass.
LossWithGrad semantic_loss_with_grad(const Circuit& c, const ProbVector& p, const LossConfig& cfg = {});

}  // namespace semloss
