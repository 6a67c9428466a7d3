#include "semloss/experiments.hpp"

namespace semloss {

namespace {

// Early in training every net sits on a plateau predicting no edges at all
// for a few hundred epochs, so patience spans the whole run and the best
// validation checkpoint is kept.
TrainConfig structured_train_config(double w) {
  TrainConfig t;
  t.w = w;
  t.bit_reduction = BitReduction::Mean;
  t.adam.learning_rate = 0.005;
  t.max_epochs = 2000;
  t.patience = 2000;
  return t;
}

}  // namespace

StructuredRunConfig default_grid_config() {
  StructuredRunConfig c;
  c.hidden_layers = 5;
  c.hidden_units = 50;
  c.train = structured_train_config(0.5);
  return c;
}

StructuredRunConfig default_preference_config() {
  StructuredRunConfig c;
  c.hidden_layers = 3;
  c.hidden_units = 25;
  c.train = structured_train_config(0.25);
  return c;
}

ToyRunConfig default_toy_config() {
  ToyRunConfig c;
  c.train.w = 0.1;
  c.train.adam.learning_rate = 0.05;
  c.train.max_epochs = 1000;
  return c;
}

namespace {

Mlp structured_model(std::size_t inputs, std::size_t outputs, const StructuredRunConfig& cfg) {
  std::vector<std::size_t> sizes{inputs};
  sizes.insert(sizes.end(), cfg.hidden_layers, cfg.hidden_units);
  sizes.push_back(outputs);
  std::mt19937_64 rng(cfg.train.seed);
  return Mlp::glorot(sizes, OutputActivation::Sigmoid, rng);
}

StructuredRunResult run_structured(const Dataset& data, const Task& task, const StructuredRunConfig& cfg) {
  Mlp init = structured_model(static_cast<std::size_t>(data.features.cols()),
                              static_cast<std::size_t>(data.labels.cols()), cfg);
  StructuredRunResult r{train(std::move(init), cfg.train, data, task), {}};
  r.test = evaluate_metrics(r.fit.model, data, Split::Test, task);
  return r;
}

}  // namespace

nlohmann::json StructuredRunResult::to_json() const {
  nlohmann::json j = semloss::to_json(test);
  j["best_epoch"] = fit.best_epoch;
  j["epochs_run"] = fit.history.size();
  return j;
}

StructuredRunResult run_grid(const GridSpec& g, const Circuit& constraint, const Dataset& data,
                             const StructuredRunConfig& cfg) {
  if (static_cast<std::size_t>(data.features.cols()) != g.num_nodes() + g.num_edges() ||
      static_cast<std::size_t>(data.labels.cols()) != g.num_edges())
    throw InputError("dataset does not match the grid dimensions");
  Task task(&constraint, g.num_nodes(), [g](const Eigen::RowVectorXd& f) { return grid_endpoint_evidence(g, f); });
  return run_structured(data, task, cfg);
}

StructuredRunResult run_preference(const Circuit& constraint, const Dataset& data, const StructuredRunConfig& cfg) {
  if (static_cast<std::size_t>(data.labels.cols()) != constraint.universe())
    throw InputError("label width does not match the ranking constraint");
  return run_structured(data, Task(&constraint), cfg);
}

nlohmann::json ToyRunResult::to_json() const {
  return {{"unlabeled_accuracy", unlabeled_accuracy},
          {"unlabeled_entropy", unlabeled_entropy},
          {"boundary", {{"a", a}, {"b", b}, {"c", c}}}};
}

ToyRunResult run_toy(const Dataset& data, const ToyRunConfig& cfg) {
  static const Circuit one_of_two = exactly_one(2);
  if (data.features.cols() != 2 || data.labels.cols() != 2) throw InputError("toy data must be 2D with two classes");
  std::mt19937_64 rng(cfg.train.seed);
  Mlp init = Mlp::glorot({2, 2}, OutputActivation::Softmax, rng);
  TrainResult fit = train(std::move(init), cfg.train, data, Task(&one_of_two));
  ToyRunResult r{fit.model};
  auto rows = data.rows(Split::Unlabeled);
  r.unlabeled_accuracy = argmax_accuracy(r.model, data, rows);
  r.unlabeled_entropy = mean_entropy(r.model, data, rows);
  auto w = r.model.weight(0);
  auto bias = r.model.bias(0);
  r.a = w(0, 1) - w(0, 0);
  r.b = w(1, 1) - w(1, 0);
  r.c = bias[1] - bias[0];
  return r;
}

}  // namespace semloss
