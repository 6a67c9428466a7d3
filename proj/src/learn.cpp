#include "semloss/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace semloss {

void TrainConfig::validate() const {
  if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("semantic weight w must be a finite value >= 0");
  if (!(adam.learning_rate > 0.0)) throw InputError("learning rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw InputError("Adam betas must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw InputError("Adam epsilon must be positive");
  if (patience < 1) throw InputError("patience must be at least 1");
  if (max_epochs < 1) throw InputError("max_epochs must be at least 1");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"w", c.w},
          {"regularizer", c.regularizer == Regularizer::Semantic ? "semantic" : "entropy"},
          {"bit_reduction", c.bit_reduction == BitReduction::Sum ? "sum" : "mean"},
          {"learning_rate", c.adam.learning_rate},
          {"beta1", c.adam.beta1},
          {"beta2", c.adam.beta2},
          {"epsilon", c.adam.epsilon},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  try {
    if (j.contains("w")) c.w = j["w"].get<double>();
    if (j.contains("regularizer")) {
      auto r = j["regularizer"].get<std::string>();
      if (r == "semantic")
        c.regularizer = Regularizer::Semantic;
      else if (r == "entropy")
        c.regularizer = Regularizer::Entropy;
      else
        throw InputError("unknown regularizer '" + r + "'");
    }
    if (j.contains("bit_reduction")) {
      auto r = j["bit_reduction"].get<std::string>();
      if (r != "sum" && r != "mean") throw InputError("bit_reduction must be 'sum' or 'mean'");
      c.bit_reduction = r == "sum" ? BitReduction::Sum : BitReduction::Mean;
    }
    if (j.contains("learning_rate")) c.adam.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("beta1")) c.adam.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) c.adam.beta2 = j["beta2"].get<double>();
    if (j.contains("epsilon")) c.adam.epsilon = j["epsilon"].get<double>();
    if (j.contains("max_epochs")) c.max_epochs = j["max_epochs"].get<std::size_t>();
    if (j.contains("patience")) c.patience = j["patience"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad training config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const Metrics& m) {
  auto num = [](double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); };
  return {{"coherent", num(m.coherent)}, {"incoherent", num(m.incoherent)}, {"constraint", num(m.constraint)}};
}

namespace {

double clamp_prob(double x) { return std::clamp(x, kProbClamp, 1.0 - kProbClamp); }

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

LossConfig training_loss_config() {
  LossConfig lc;
  lc.floor_unsat = true;
  return lc;
}

}  // namespace

LossValueGrad combined_loss(const ProbVector& p, const std::optional<State>& label, const Circuit& c, double w,
                            OutputActivation act) {
  if (!(w >= 0.0)) throw InputError("semantic weight w must be >= 0");
  const auto n = p.size();
  ProbVector q = p.unaryExpr([](double x) { return clamp_prob(x); });
  LossValueGrad out{0.0, Eigen::VectorXd::Zero(n)};
  if (label) {
    if (static_cast<Eigen::Index>(label->size()) != n)
      throw InputError("label has " + std::to_string(label->size()) + " entries, expected " + std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool y = (*label)[static_cast<std::size_t>(i)] != 0;
      if (y) {
        out.value -= std::log(q[i]);
        out.grad[i] -= 1.0 / q[i];
      } else if (act == OutputActivation::Sigmoid) {
        out.value -= std::log1p(-q[i]);
        out.grad[i] += 1.0 / (1.0 - q[i]);
      }
    }
  }
  if (w > 0.0) {
    auto sl = semantic_loss_with_grad(c, q, training_loss_config());
    out.value += w * sl.value;
    out.grad += w * sl.grad;
  }
  return out;
}

LossValueGrad entropy_loss(const ProbVector& p) {
  LossValueGrad out{0.0, Eigen::VectorXd(p.size())};
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double lp = std::log(std::max(p[i], kProbClamp));
    out.value -= p[i] * lp;
    out.grad[i] = -(lp + 1.0);
  }
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,valid_loss,coherent,incoherent,constraint\n";
  char buf[160];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.valid_loss,
                  r.metrics.coherent, r.metrics.incoherent, r.metrics.constraint);
    out += buf;
  }
  return out;
}

std::ptrdiff_t ConstraintCache::index_for(const Eigen::RowVectorXd& features) {
  if (!task_.constraint) return -1;
  Evidence e = task_.evidence ? task_.evidence(features) : Evidence{};
  auto it = index_.find(e);
  if (it != index_.end()) return it->second;
  auto idx = static_cast<std::ptrdiff_t>(circuits_.size());
  circuits_.push_back(e.empty() ? *task_.constraint : condition(*task_.constraint, e));
  evidence_.push_back(e);
  index_.emplace(std::move(e), idx);
  return idx;
}

namespace {

// Probability vector over the circuit's universe: evidence values, then the
// network outputs at the task offset.
ProbVector circuit_inputs(const Circuit& c, const Evidence& e, std::size_t offset, const Eigen::RowVectorXd& p) {
  if (offset + static_cast<std::size_t>(p.size()) > c.universe())
    throw InputError("network outputs do not fit the constraint's variables");
  ProbVector full = ProbVector::Zero(static_cast<Eigen::Index>(c.universe()));
  for (const auto& [v, val] : e) full[v - 1] = val ? 1.0 : 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) full[static_cast<Eigen::Index>(offset) + j] = clamp_prob(p[j]);
  return full;
}

}  // namespace

Objective batch_objective(const Mlp& model, const TrainConfig& cfg, const Dataset& data,
                          const std::vector<std::size_t>& rows, ConstraintCache& cache, bool need_grad) {
  Objective obj;
  const Eigen::Index k = static_cast<Eigen::Index>(model.output_size());
  if (rows.empty()) {
    obj.grad = Eigen::VectorXd::Zero(model.params().size());
    return obj;
  }
  if (data.labels.cols() != k) throw InputError("label width does not match the network outputs");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(rows[i]));
  auto tape = model.forward_tape(x);
  const Eigen::MatrixXd z = tape.logits();
  const OutputActivation act = model.output_activation();
  const Eigen::MatrixXd p = output_probabilities(z, act);
  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(z.rows(), k);

  std::size_t n_labeled = 0;
  for (auto r : rows) n_labeled += data.split[r] != Split::Unlabeled;
  double ce_scale = n_labeled ? 1.0 / static_cast<double>(n_labeled) : 0.0;
  if (act == OutputActivation::Sigmoid && cfg.bit_reduction == BitReduction::Mean) ce_scale /= static_cast<double>(k);
  const double reg_scale = cfg.w / static_cast<double>(rows.size());
  const bool use_reg = cfg.w > 0.0;
  const Task& task = cache.task();

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto r = static_cast<Eigen::Index>(rows[i]);
    if (data.split[rows[i]] != Split::Unlabeled) {
      double ce = 0.0;
      if (act == OutputActivation::Sigmoid) {
        for (Eigen::Index j = 0; j < k; ++j) ce += softplus(z(ii, j)) - data.labels(r, j) * z(ii, j);
      } else {
        double m = z.row(ii).maxCoeff();
        double lse = m + std::log((z.row(ii).array() - m).exp().sum());
        ce = lse * data.labels.row(r).sum() - data.labels.row(r).dot(z.row(ii));
      }
      obj.value += ce_scale * ce;
      dz.row(ii) += ce_scale * (p.row(ii) - data.labels.row(r));
    }
    if (!use_reg) continue;

    Eigen::RowVectorXd g(k);  // d regularizer / d p
    double reg = 0.0;
    if (cfg.regularizer == Regularizer::Semantic) {
      auto idx = cache.index_for(data.features.row(r));
      if (idx < 0) throw InputError("semantic regularizer needs a constraint circuit");
      const Circuit& c = cache.circuit(idx);
      ProbVector full = circuit_inputs(c, cache.evidence(idx), task.var_offset, p.row(ii));
      if (need_grad) {
        auto sl = semantic_loss_with_grad(c, full, training_loss_config());
        reg = sl.value;
        g = sl.grad.segment(static_cast<Eigen::Index>(task.var_offset), k).transpose();
      } else {
        reg = semantic_loss(c, full, training_loss_config());
      }
    } else if (act == OutputActivation::Softmax) {
      auto h = entropy_loss(p.row(ii).transpose());
      reg = h.value;
      g = h.grad.transpose();
    } else {
      // Sum of per-output binary entropies.
      for (Eigen::Index j = 0; j < k; ++j) {
        double q = clamp_prob(p(ii, j));
        reg -= q * std::log(q) + (1.0 - q) * std::log1p(-q);
        g[j] = std::log1p(-q) - std::log(q);
      }
    }
    obj.value += reg_scale * reg;
    if (!need_grad) continue;
    if (act == OutputActivation::Sigmoid)
      dz.row(ii).array() += reg_scale * g.array() * p.row(ii).array() * (1.0 - p.row(ii).array());
    else
      dz.row(ii).array() += reg_scale * p.row(ii).array() * (g.array() - g.dot(p.row(ii)));
  }
  obj.grad = need_grad ? model.backward(tape, dz) : Eigen::VectorXd();
  return obj;
}

Metrics evaluate_metrics(const Mlp& model, const Dataset& data, const std::vector<std::size_t>& rows,
                         ConstraintCache& cache) {
  Metrics m;
  if (rows.empty()) return m;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(rows[i]));
  const Eigen::MatrixXd p = model.forward(x);
  const Eigen::Index k = p.cols();
  const std::size_t offset = cache.task().var_offset;
  std::size_t exact = 0, bits = 0, satisfied = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto r = static_cast<Eigen::Index>(rows[i]);
    std::size_t right = 0;
    for (Eigen::Index j = 0; j < k; ++j) right += (p(ii, j) > 0.5) == (data.labels(r, j) > 0.5);
    bits += right;
    exact += right == static_cast<std::size_t>(k);
    auto idx = cache.index_for(data.features.row(r));
    if (idx < 0) continue;
    const Circuit& c = cache.circuit(idx);
    State s(c.universe(), 0);
    for (const auto& [v, val] : cache.evidence(idx)) s[v - 1] = val;
    for (Eigen::Index j = 0; j < k; ++j) s[offset + static_cast<std::size_t>(j)] = p(ii, j) > 0.5;
    satisfied += c.evaluate(s);
  }
  const double n = static_cast<double>(rows.size());
  m.coherent = 100.0 * static_cast<double>(exact) / n;
  m.incoherent = 100.0 * static_cast<double>(bits) / (n * static_cast<double>(k));
  m.constraint = cache.task().constraint ? 100.0 * static_cast<double>(satisfied) / n
                                         : std::numeric_limits<double>::quiet_NaN();
  return m;
}

Metrics evaluate_metrics(const Mlp& model, const Dataset& data, Split split, const Task& task) {
  ConstraintCache cache(task);
  return evaluate_metrics(model, data, data.rows(split), cache);
}

TrainResult train(Mlp model, const TrainConfig& cfg, const Dataset& data, const Task& task) {
  cfg.validate();
  if (static_cast<std::size_t>(data.features.cols()) != model.input_size())
    throw InputError("feature width does not match the network inputs");
  std::vector<std::size_t> train_rows, valid_rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.split[i] == Split::Train || data.split[i] == Split::Unlabeled) train_rows.push_back(i);
    if (data.split[i] == Split::Valid) valid_rows.push_back(i);
  }
  if (train_rows.empty()) throw InputError("no training rows");
  const auto& metric_rows = valid_rows.empty() ? train_rows : valid_rows;

  ConstraintCache cache(task);
  Adam opt(static_cast<std::size_t>(model.params().size()), cfg.adam);
  TrainResult result{model, {}, 0};
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto obj = batch_objective(model, cfg, data, train_rows, cache);
    if (!std::isfinite(obj.value) || !obj.grad.allFinite())
      throw ComputeError("training diverged at epoch " + std::to_string(epoch) + ": loss " + std::to_string(obj.value));
    opt.step(model.params(), obj.grad);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = obj.value;
    if (!valid_rows.empty()) rec.valid_loss = batch_objective(model, cfg, data, valid_rows, cache, false).value;
    rec.metrics = evaluate_metrics(model, data, metric_rows, cache);
    result.history.push_back(rec);

    if (valid_rows.empty()) {
      result.model = model;
      result.best_epoch = epoch;
      continue;
    }
    if (!std::isfinite(rec.valid_loss))
      throw ComputeError("validation loss diverged at epoch " + std::to_string(epoch));
    if (rec.valid_loss < best) {
      best = rec.valid_loss;
      result.model = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

double argmax_accuracy(const Mlp& model, const Dataset& data, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return 0.0;
  std::size_t right = 0;
  for (auto r : rows) {
    Eigen::VectorXd p = model.predict(Eigen::VectorXd(data.features.row(static_cast<Eigen::Index>(r)).transpose()));
    Eigen::Index pred, truth;
    p.maxCoeff(&pred);
    data.labels.row(static_cast<Eigen::Index>(r)).maxCoeff(&truth);
    right += pred == truth;
  }
  return 100.0 * static_cast<double>(right) / static_cast<double>(rows.size());
}

double mean_entropy(const Mlp& model, const Dataset& data, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return 0.0;
  double total = 0.0;
  for (auto r : rows) {
    Eigen::VectorXd p = model.predict(Eigen::VectorXd(data.features.row(static_cast<Eigen::Index>(r)).transpose()));
    if (model.output_activation() == OutputActivation::Softmax) {
      total += entropy_loss(p).value;
    } else {
      for (double q : p) {
        q = clamp_prob(q);
        total -= q * std::log(q) + (1.0 - q) * std::log1p(-q);
      }
    }
  }
  return total / static_cast<double>(rows.size());
}

}  // namespace semloss
