#include "semloss/engine.hpp"

#include <algorithm>

namespace semloss {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_of(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

void check_inputs(const Circuit& c, const ProbVector& p) { check_probabilities(p, c.universe()); }

void forward(const Circuit& c, const ProbVector& p, std::vector<double>& lv) {
  lv.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& n = c.node(static_cast<std::uint32_t>(i));
    switch (n.kind) {
      case NodeKind::Constant: lv[i] = n.value ? 0.0 : kNegInf; break;
      case NodeKind::Literal: {
        double pi = p[n.lit.var - 1];
        lv[i] = n.lit.positive ? log_of(pi) : log_of(1.0 - pi);
        break;
      }
      case NodeKind::Product: {
        double acc = 0.0;
        for (auto ch : n.children) acc += lv[ch];
        lv[i] = acc;
        break;
      }
      case NodeKind::Sum: {
        double hi = kNegInf;
        for (auto ch : n.children) hi = std::max(hi, lv[ch]);
        if (hi == kNegInf) {
          lv[i] = kNegInf;
          break;
        }
        double s = 0.0;
        for (auto ch : n.children) s += std::exp(lv[ch] - hi);
        lv[i] = hi + std::log(s);
        break;
      }
    }
  }
}

void backward(const Circuit& c, const std::vector<double>& lv, std::vector<double>& lg) {
  lg.assign(c.size(), kNegInf);
  lg[c.root()] = 0.0;
  std::vector<double> prefix;
  for (std::size_t i = c.size(); i-- > 0;) {
    if (lg[i] == kNegInf) continue;
    const auto& n = c.node(static_cast<std::uint32_t>(i));
    if (n.kind == NodeKind::Sum) {
      for (auto ch : n.children) lg[ch] = log_add(lg[ch], lg[i]);
    } else if (n.kind == NodeKind::Product) {
      // d v_i / d v_ch is the product of the siblings; prefix/suffix sums of
      // logs stay exact when some sibling is zero.
      const auto& kids = n.children;
      prefix.assign(kids.size() + 1, 0.0);
      for (std::size_t j = 0; j < kids.size(); ++j) prefix[j + 1] = prefix[j] + lv[kids[j]];
      double suffix = 0.0;
      for (std::size_t j = kids.size(); j-- > 0;) {
        lg[kids[j]] = log_add(lg[kids[j]], lg[i] + prefix[j] + suffix);
        suffix += lv[kids[j]];
      }
    }
  }
}

}  // namespace

double wmc(const Circuit& c, const ProbVector& p) {
  check_inputs(c, p);
  return wmc_linear<double>(c, p);
}

double log_wmc(const Circuit& c, const ProbVector& p) {
  check_inputs(c, p);
  std::vector<double> lv;
  forward(c, p, lv);
  return lv[c.root()];
}

EvalTrace trace(const Circuit& c, const ProbVector& p) {
  check_inputs(c, p);
  EvalTrace t;
  forward(c, p, t.log_value);
  t.log_wmc = t.log_value[c.root()];
  if (t.log_wmc == kNegInf)
    t.log_partial.assign(c.size(), kNegInf);
  else
    backward(c, t.log_value, t.log_partial);
  return t;
}

namespace {

double loss_from_log_wmc(double lw, const LossConfig& cfg) {
  if (!(cfg.scale > 0.0)) throw InputError("loss scale K must be positive");
  if (cfg.floor_unsat) return -cfg.scale * std::max(lw, std::log(cfg.epsilon));
  if (lw == kNegInf) return std::numeric_limits<double>::infinity();
  return -cfg.scale * lw;
}

}  // namespace

double semantic_loss(const Circuit& c, const ProbVector& p, const LossConfig& cfg) {
  return loss_from_log_wmc(log_wmc(c, p), cfg);
}

LossWithGrad semantic_loss_with_grad(const Circuit& c, const ProbVector& p, const LossConfig& cfg) {
  EvalTrace t = trace(c, p);
  LossWithGrad out{loss_from_log_wmc(t.log_wmc, cfg), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.universe()))};
  if (t.log_wmc == kNegInf) {
    if (!cfg.floor_unsat) throw ComputeError("semantic loss gradient undefined: constraint has zero probability");
    return out;
  }
  if (cfg.floor_unsat && t.log_wmc < std::log(cfg.epsilon)) return out;  // flat region of the floor

  // d WMC/d p_i = partial(x_i leaf) - partial(not x_i leaf); dividing by
  // WMC happens in log space.
  std::vector<double> pos(c.universe(), kNegInf), neg(c.universe(), kNegInf);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& n = c.node(static_cast<std::uint32_t>(i));
    if (n.kind != NodeKind::Literal) continue;
    auto& slot = n.lit.positive ? pos[n.lit.var - 1] : neg[n.lit.var - 1];
    slot = log_add(slot, t.log_partial[i]);
  }
  for (std::size_t v = 0; v < c.universe(); ++v)
    out.grad[static_cast<Eigen::Index>(v)] =
        -cfg.scale * (std::exp(pos[v] - t.log_wmc) - std::exp(neg[v] - t.log_wmc));
  return out;
}

Eigen::VectorXd semantic_loss_grad(const Circuit& c, const ProbVector& p, const LossConfig& cfg) {
  return semantic_loss_with_grad(c, p, cfg).grad;
}

}  // namespace semloss
