#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semloss/data.hpp"
#include "semloss/engine.hpp"
#include "semloss/mlp.hpp"

namespace semloss {

enum class Regularizer : std::uint8_t { Semantic, Entropy };

// Per-example cross entropy of sigmoid outputs: summed over the output bits,
// or averaged over them.
enum class BitReduction : std::uint8_t { Sum, Mean };

struct TrainConfig {
  double w = 0.0;  // weight of the regularizer
  Regularizer regularizer = Regularizer::Semantic;
  BitReduction bit_reduction = BitReduction::Sum;
  Adam::Options adam;
  std::size_t max_epochs = 2000;
  std::size_t patience = 50;  // epochs without validation improvement
  std::uint64_t seed = 1;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
// Missing keys keep the values already in `base`.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct Metrics {
  double coherent = 0.0;    // % of examples with every output bit right
  double incoherent = 0.0;  // % of output bits right
  double constraint = 0.0;  // % of binarized predictions satisfying the constraint
};

nlohmann::json to_json(const Metrics& m);

// Values kept away from 0 and 1 before taking logs.
inline constexpr double kProbClamp = 1e-12;

struct LossValueGrad {
  double value = 0.0;
  Eigen::VectorXd grad;
};

// Cross entropy against `label` (if any) plus w times the semantic loss of p
// under c. Sigmoid outputs use per-variable binary cross entropy, softmax
// outputs categorical cross entropy. The gradient is with respect to p.
LossValueGrad combined_loss(const ProbVector& p, const std::optional<State>& label, const Circuit& c, double w,
                            OutputActivation act = OutputActivation::Sigmoid);

// Shannon entropy (nats) of a distribution, with logs floored.
LossValueGrad entropy_loss(const ProbVector& p);

// How network outputs meet the constraint. Output j is variable
// var_offset + j + 1 of the circuit; `evidence`, when set, fixes further
// variables per example and the circuit is conditioned on them.
struct Task {
  Task() = default;
  explicit Task(const Circuit* c, std::size_t offset = 0,
                std::function<Evidence(const Eigen::RowVectorXd&)> ev = {})
      : constraint(c), var_offset(offset), evidence(std::move(ev)) {}

  const Circuit* constraint = nullptr;
  std::size_t var_offset = 0;
  std::function<Evidence(const Eigen::RowVectorXd&)> evidence;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_loss = std::numeric_limits<double>::quiet_NaN();
  Metrics metrics;  // on the validation rows, or the training rows if there are none
};

std::string history_csv(const std::vector<EpochRecord>& history);

struct TrainResult {
  Mlp model;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

// Conditioned circuits for a task, one per distinct evidence pattern.
class ConstraintCache {
 public:
  explicit ConstraintCache(const Task& task) : task_(task) {}

  // Index of the circuit for a feature row; -1 if the task has no constraint.
  std::ptrdiff_t index_for(const Eigen::RowVectorXd& features);
  const Circuit& circuit(std::ptrdiff_t idx) const { return circuits_[static_cast<std::size_t>(idx)]; }
  const Evidence& evidence(std::ptrdiff_t idx) const { return evidence_[static_cast<std::size_t>(idx)]; }
  const Task& task() const { return task_; }

 private:
  Task task_;
  std::map<Evidence, std::ptrdiff_t> index_;
  std::vector<Circuit> circuits_;
  std::vector<Evidence> evidence_;
};

// Full-batch objective over the given rows: mean cross entropy over the
// labeled rows plus w times the mean regularizer over all rows. Returns the
// value and the parameter gradient.
struct Objective {
  double value = 0.0;
  Eigen::VectorXd grad;
};
Objective batch_objective(const Mlp& model, const TrainConfig& cfg, const Dataset& data,
                          const std::vector<std::size_t>& rows, ConstraintCache& cache, bool need_grad = true);

// Trains on rows tagged Train (labeled) and Unlabeled. Early stopping watches
// the objective on rows tagged Valid and restores the best parameters; with no
// Valid rows all max_epochs run.
TrainResult train(Mlp model, const TrainConfig& cfg, const Dataset& data, const Task& task);

// Binarizes outputs at 0.5.
Metrics evaluate_metrics(const Mlp& model, const Dataset& data, const std::vector<std::size_t>& rows,
                         ConstraintCache& cache);
Metrics evaluate_metrics(const Mlp& model, const Dataset& data, Split split, const Task& task);

// Classification accuracy (%) by argmax, and mean output entropy, on rows.
double argmax_accuracy(const Mlp& model, const Dataset& data, const std::vector<std::size_t>& rows);
double mean_entropy(const Mlp& model, const Dataset& data, const std::vector<std::size_t>& rows);

}  // namespace semloss
