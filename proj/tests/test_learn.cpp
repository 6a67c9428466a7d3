#include <gtest/gtest.h>

#include <cmath>

#include "semloss/experiments.hpp"
#include "semloss/learn.hpp"

using namespace semloss;

namespace {

// Relative error of the parameter gradient against central differences.
double gradient_error(Mlp model, const TrainConfig& cfg, const Dataset& data, const std::vector<std::size_t>& rows,
                      const Task& task) {
  ConstraintCache cache(task);
  Eigen::VectorXd g = batch_objective(model, cfg, data, rows, cache).grad;
  double worst = 0.0;
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < model.params().size(); ++i) {
    double x = model.params()[i];
    model.params()[i] = x + h;
    double up = batch_objective(model, cfg, data, rows, cache, false).value;
    model.params()[i] = x - h;
    double down = batch_objective(model, cfg, data, rows, cache, false).value;
    model.params()[i] = x;
    double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max(1e-3, std::abs(fd)));
  }
  return worst;
}

Dataset random_binary_data(std::mt19937_64& rng, std::size_t n, std::size_t d, const Circuit& c,
                           std::size_t unlabeled) {
  Dataset data;
  std::normal_distribution<double> z(0.0, 1.0);
  data.features = Eigen::MatrixXd::NullaryExpr(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d),
                                               [&]() { return z(rng); });
  data.labels = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c.universe()));
  // Labels: the first model found by scanning from a random state.
  std::uniform_int_distribution<std::uint32_t> start(0, (1u << c.universe()) - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t k = start(rng);; ++k) {
      State s(c.universe());
      for (std::size_t j = 0; j < s.size(); ++j) s[j] = (k >> j) & 1;
      if (!c.evaluate(s)) continue;
      for (std::size_t j = 0; j < s.size(); ++j) data.labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s[j];
      break;
    }
  }
  data.split.assign(n, Split::Train);
  for (std::size_t i = 0; i < unlabeled && i < n; ++i) data.split[n - 1 - i] = Split::Unlabeled;
  return data;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> r(d.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
  return r;
}

// Linear model whose thresholded outputs copy binary inputs.
Mlp copy_model(std::size_t n) {
  Mlp m({n, n}, OutputActivation::Sigmoid);
  m.weight(0) = 20.0 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.bias(0).setConstant(-10.0);
  return m;
}

}  // namespace

TEST(Mlp, ZeroWeights) {
  Mlp s({5, 3, 4}, OutputActivation::Sigmoid);
  EXPECT_TRUE(s.predict(Eigen::VectorXd::Ones(5)).isApprox(Eigen::VectorXd::Constant(4, 0.5)));
  Mlp m({5, 10}, OutputActivation::Softmax);
  EXPECT_TRUE(m.predict(Eigen::VectorXd::Ones(5)).isApprox(Eigen::VectorXd::Constant(10, 0.1)));
}

TEST(Mlp, SeededForwardRegression) {
  std::mt19937_64 rng(5);
  Mlp m = Mlp::glorot({3, 4, 2}, OutputActivation::Sigmoid, rng);
  Eigen::VectorXd x(3);
  x << 0.1, -0.2, 0.3;
  Eigen::VectorXd p = m.predict(x);
  EXPECT_NEAR(p[0], 0.42025134800693803, 1e-14);
  EXPECT_NEAR(p[1], 0.64555271323376306, 1e-14);
}

TEST(Mlp, ErrorsAndCheckpoint) {
  std::mt19937_64 rng(6);
  Mlp m = Mlp::glorot({4, 6, 3}, OutputActivation::Softmax, rng);
  EXPECT_THROW(m.predict(Eigen::VectorXd::Ones(3)), InputError);
  EXPECT_THROW(m.predict(Eigen::VectorXd::Constant(4, std::numeric_limits<double>::infinity())), ComputeError);
  EXPECT_THROW(Mlp({4}, OutputActivation::Sigmoid), InputError);
  Mlp back = Mlp::from_json(nlohmann::json::parse(m.to_json().dump()));
  EXPECT_EQ(back.params(), m.params());
  EXPECT_EQ(back.layer_sizes(), m.layer_sizes());
  EXPECT_EQ(back.output_activation(), OutputActivation::Softmax);
  auto j = m.to_json();
  j["layers"][0]["bias"] = {1.0};
  EXPECT_THROW(Mlp::from_json(j), InputError);
  // Row-major layout: entry (0, 1) of the first weight matrix is the second number.
  EXPECT_EQ(m.to_json()["layers"][0]["weights"][1].get<double>(), m.weight(0)(0, 1));
}

TEST(Mlp, GlorotRange) {
  std::mt19937_64 rng(7);
  Mlp m = Mlp::glorot({40, 50, 24}, OutputActivation::Sigmoid, rng);
  EXPECT_LE(m.weight(0).cwiseAbs().maxCoeff(), std::sqrt(6.0 / 90.0));
  EXPECT_LE(m.weight(1).cwiseAbs().maxCoeff(), std::sqrt(6.0 / 74.0));
  EXPECT_TRUE(m.bias(0).isZero());
}

TEST(Losses, Entropy) {
  EXPECT_NEAR(entropy_loss(Eigen::Vector2d(0.5, 0.5)).value, std::log(2.0), 1e-15);
  EXPECT_EQ(entropy_loss(Eigen::Vector2d(1.0, 0.0)).value, 0.0);
  EXPECT_NEAR(entropy_loss(Eigen::Vector2d(0.9, 0.1)).value, 0.3251, 1e-4);
  EXPECT_NEAR(entropy_loss(Eigen::Vector2d(0.9, 0.1)).value, 0.3250829733914482, 1e-15);
}

TEST(Losses, CombinedReducesToCrossEntropyAtZeroWeight) {
  Circuit c = exactly_one(3);
  ProbVector p(3);
  p << 0.2, 0.7, 0.4;
  State y = {0, 1, 0};
  auto l = combined_loss(p, y, c, 0.0);
  EXPECT_NEAR(l.value, -(std::log(0.8) + std::log(0.7) + std::log(0.6)), 1e-14);
  auto soft = combined_loss(Eigen::Vector3d(0.2, 0.7, 0.1), y, c, 0.0, OutputActivation::Softmax);
  EXPECT_NEAR(soft.value, -std::log(0.7), 1e-14);
  EXPECT_THROW(combined_loss(p, State{1, 0}, c, 0.5), InputError);
  EXPECT_THROW(combined_loss(p, y, c, -1.0), InputError);
}

TEST(Losses, UnlabeledExactlyOneForcesConfidence) {
  Circuit c = exactly_one(2);
  const double w = 0.3;
  for (double q : {0.1, 0.35, 0.5, 0.8}) {
    auto l = combined_loss(Eigen::Vector2d(q, 1 - q), std::nullopt, c, w, OutputActivation::Softmax);
    EXPECT_NEAR(l.value, -w * std::log(q * q + (1 - q) * (1 - q)), 1e-12);
  }
  // Maximal at the uniform point, vanishing at the corners.
  double mid = combined_loss(Eigen::Vector2d(0.5, 0.5), std::nullopt, c, w).value;
  double edge = combined_loss(Eigen::Vector2d(1.0, 0.0), std::nullopt, c, w).value;
  EXPECT_GT(mid, combined_loss(Eigen::Vector2d(0.6, 0.4), std::nullopt, c, w).value);
  EXPECT_NEAR(edge, 0.0, 1e-10);
}

TEST(Losses, PerfectPredictionHasNearZeroLoss) {
  Circuit c = exactly_one(3);
  auto l = combined_loss(Eigen::Vector3d(0, 1, 0), State{0, 1, 0}, c, 0.5);
  EXPECT_LT(l.value, 1e-10);
}

TEST(Losses, CombinedGradientMatchesFiniteDifferences) {
  Circuit c = exactly_one(4);
  ProbVector p(4);
  p << 0.2, 0.6, 0.3, 0.45;
  State y = {0, 1, 0, 0};
  auto l = combined_loss(p, y, c, 0.7);
  for (Eigen::Index i = 0; i < 4; ++i) {
    ProbVector a = p, b = p;
    a[i] += 1e-6;
    b[i] -= 1e-6;
    double fd = (combined_loss(a, y, c, 0.7).value - combined_loss(b, y, c, 0.7).value) / 2e-6;
    EXPECT_NEAR(l.grad[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Backprop, SigmoidThroughCircuit) {
  std::mt19937_64 rng(61);
  Circuit c = total_order(3);
  Dataset data = random_binary_data(rng, 12, 5, c, 4);
  Mlp m = Mlp::glorot({5, 7, 9}, OutputActivation::Sigmoid, rng);
  TrainConfig cfg;
  cfg.w = 0.8;
  EXPECT_LT(gradient_error(m, cfg, data, all_rows(data), Task{&c}), 1e-4);
}

TEST(Backprop, SoftmaxThroughCircuitAndEntropy) {
  std::mt19937_64 rng(62);
  Circuit c = exactly_one(4);
  Dataset data = random_binary_data(rng, 10, 3, c, 5);
  Mlp m = Mlp::glorot({3, 6, 5, 4}, OutputActivation::Softmax, rng);
  TrainConfig cfg;
  cfg.w = 1.5;
  EXPECT_LT(gradient_error(m, cfg, data, all_rows(data), Task{&c}), 1e-4);
  cfg.regularizer = Regularizer::Entropy;
  EXPECT_LT(gradient_error(m, cfg, data, all_rows(data), Task{&c}), 1e-4);
}

TEST(Backprop, ConditionedGridConstraint) {
  GridSpec g(4, 4);
  Circuit c = grid_simple_path(g);
  Dataset data = gen_grid_dataset(g, 8, 63);
  std::mt19937_64 rng(63);
  Mlp m = Mlp::glorot({40, 6, 24}, OutputActivation::Sigmoid, rng);
  TrainConfig cfg;
  cfg.w = 0.5;
  Task task{&c, g.num_nodes(), [g](const Eigen::RowVectorXd& f) { return grid_endpoint_evidence(g, f); }};
  EXPECT_LT(gradient_error(m, cfg, data, all_rows(data), task), 1e-4);
}

TEST(Metrics, KnownCases) {
  Circuit c = exactly_one(3);
  Dataset d;
  d.features = (Eigen::MatrixXd(3, 3) << 1, 0, 0, 0, 1, 0, 0, 0, 1).finished();
  d.labels = d.features;
  d.split.assign(3, Split::Test);
  Metrics m = evaluate_metrics(copy_model(3), d, Split::Test, Task{&c});
  EXPECT_EQ(m.coherent, 100.0);
  EXPECT_EQ(m.incoherent, 100.0);
  EXPECT_EQ(m.constraint, 100.0);

  Dataset one;
  one.features = (Eigen::MatrixXd(1, 4) << 1, 0, 0, 0).finished();
  one.labels = (Eigen::MatrixXd(1, 4) << 1, 0, 1, 0).finished();
  one.split = {Split::Test};
  Metrics k = evaluate_metrics(copy_model(4), one, Split::Test, Task{});
  EXPECT_EQ(k.coherent, 0.0);
  EXPECT_EQ(k.incoherent, 75.0);
  EXPECT_TRUE(std::isnan(k.constraint));
}

TEST(Metrics, AllZeroGridPredictionsViolateConstraint) {
  GridSpec g(4, 4);
  Circuit c = grid_simple_path(g);
  Dataset d = gen_grid_dataset(g, 20, 64);
  Mlp zero({40, 24}, OutputActivation::Sigmoid);
  zero.bias(0).setConstant(-5.0);
  Task task{&c, g.num_nodes(), [g](const Eigen::RowVectorXd& f) { return grid_endpoint_evidence(g, f); }};
  Metrics m = evaluate_metrics(zero, d, Split::Train, task);
  EXPECT_EQ(m.constraint, 0.0);
  EXPECT_EQ(m.coherent, 0.0);
  EXPECT_LE(m.coherent, m.incoherent);
}

TEST(Train, ZeroWeightMatchesCrossEntropyOnlyTrainer) {
  GridSpec g(4, 4);
  Circuit c = grid_simple_path(g);
  Dataset d = gen_grid_dataset(g, 60, 65);
  std::mt19937_64 rng(65);
  Mlp init = Mlp::glorot({40, 10, 24}, OutputActivation::Sigmoid, rng);
  TrainConfig cfg;
  cfg.max_epochs = 30;
  Task with{&c, g.num_nodes(), [g](const Eigen::RowVectorXd& f) { return grid_endpoint_evidence(g, f); }};
  Task without;
  auto a = train(init, cfg, d, with);
  auto b = train(init, cfg, d, without);
  EXPECT_EQ(a.model.params(), b.model.params());
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].valid_loss, b.history[i].valid_loss);
  }
}

TEST(Train, DeterministicAndEarlyStopping) {
  GridSpec g(4, 4);
  Circuit c = grid_simple_path(g);
  Dataset d = gen_grid_dataset(g, 80, 66);
  std::mt19937_64 rng(66);
  Mlp init = Mlp::glorot({40, 10, 24}, OutputActivation::Sigmoid, rng);
  TrainConfig cfg;
  cfg.w = 0.5;
  cfg.adam.learning_rate = 0.05;
  cfg.max_epochs = 400;
  cfg.patience = 5;
  Task task{&c, g.num_nodes(), [g](const Eigen::RowVectorXd& f) { return grid_endpoint_evidence(g, f); }};
  auto a = train(init, cfg, d, task);
  auto b = train(init, cfg, d, task);
  EXPECT_EQ(a.model.params(), b.model.params());
  EXPECT_EQ(history_csv(a.history), history_csv(b.history));
  ASSERT_LT(a.history.size(), cfg.max_epochs) << "expected early stopping with a large learning rate";
  EXPECT_EQ(a.history.size(), a.best_epoch + cfg.patience);
  double best = a.history[a.best_epoch - 1].valid_loss;
  for (const auto& r : a.history) {
    EXPECT_GE(r.valid_loss, best);
    EXPECT_LE(r.metrics.coherent, r.metrics.incoherent);
  }
  ConstraintCache cache(task);
  EXPECT_DOUBLE_EQ(batch_objective(a.model, cfg, d, d.rows(Split::Valid), cache, false).value, best);
}

TEST(Train, LearnsSimpleTask) {
  std::mt19937_64 rng(67);
  Circuit c = exactly_one(3);
  Dataset d = random_binary_data(rng, 90, 3, c, 0);
  // Class determined by the largest feature.
  d.labels.setZero();
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    Eigen::Index k;
    d.features.row(i).maxCoeff(&k);
    d.labels(i, k) = 1.0;
  }
  for (std::size_t i = 60; i < 90; ++i) d.split[i] = Split::Valid;
  Mlp init = Mlp::glorot({3, 3}, OutputActivation::Softmax, rng);
  TrainConfig cfg;
  cfg.w = 0.1;
  cfg.adam.learning_rate = 0.05;
  cfg.max_epochs = 500;
  auto r = train(init, cfg, d, Task{&c});
  EXPECT_GT(argmax_accuracy(r.model, d, d.rows(Split::Valid)), 85.0);
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
}

TEST(Train, DivergenceAndBadConfig) {
  Circuit c = exactly_one(2);
  Dataset d = gen_toy_2d(1, 4, 10);
  d.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  Mlp m({2, 2}, OutputActivation::Softmax);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  EXPECT_THROW(train(m, cfg, d, Task{&c}), ComputeError);
  cfg.w = -1.0;
  EXPECT_THROW(train(m, cfg, gen_toy_2d(1, 4, 10), Task{&c}), InputError);
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"patience", 0}}), InputError);
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"w", "heavy"}}), InputError);
  auto parsed = train_config_from_json(nlohmann::json{{"w", 0.25}, {"learning_rate", 0.01}, {"regularizer", "entropy"}});
  EXPECT_EQ(parsed.w, 0.25);
  EXPECT_EQ(parsed.adam.learning_rate, 0.01);
  EXPECT_EQ(parsed.regularizer, Regularizer::Entropy);
  EXPECT_EQ(parsed.max_epochs, 2000u);
  EXPECT_EQ(train_config_from_json(to_json(parsed)).w, parsed.w);
}

TEST(History, CsvHeader) {
  std::vector<EpochRecord> h(1);
  h[0].epoch = 1;
  h[0].train_loss = 0.5;
  EXPECT_EQ(history_csv(h).substr(0, history_csv(h).find('\n')), "epoch,train_loss,valid_loss,coherent,incoherent,constraint");
}

TEST(Toy, AmpleLabelsApproachBayes) {
  // Bayes accuracy for these clusters is about 95%.
  Dataset d = gen_toy_2d(2, 4, 400);
  for (auto r : d.rows(Split::Unlabeled)) d.split[r] = r % 4 < 2 ? Split::Train : Split::Valid;
  std::mt19937_64 rng(2);
  TrainConfig cfg;
  cfg.adam.learning_rate = 0.05;
  cfg.max_epochs = 500;
  Circuit c = exactly_one(2);
  auto r = train(Mlp::glorot({2, 2}, OutputActivation::Softmax, rng), cfg, d, Task(&c));
  EXPECT_GT(argmax_accuracy(r.model, d, d.rows(Split::Valid)), 90.0);
}

TEST(Toy, RegularizerLowersUnlabeledEntropy) {
  ToyRunConfig cfg = default_toy_config();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Dataset d = gen_toy_2d(seed, 4, 200);
    cfg.train.seed = seed;
    ToyRunConfig base = cfg;
    base.train.w = 0.0;
    double h0 = run_toy(d, base).unlabeled_entropy, h1 = run_toy(d, cfg).unlabeled_entropy;
    EXPECT_LT(h1, h0) << "seed " << seed;
  }
}
