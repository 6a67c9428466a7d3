#pragma once

#include <cstdint>
#include <string>

#include "semloss/learn.hpp"

namespace semloss {

// Shared setup of the structured-prediction runs: an MLP with `hidden_layers`
// sigmoid layers of `hidden_units` each, trained with `train` settings.
struct StructuredRunConfig {
  std::size_t hidden_layers = 5;
  std::size_t hidden_units = 50;
  TrainConfig train;
};

struct StructuredRunResult {
  TrainResult fit;
  Metrics test;
  nlohmann::json to_json() const;  // test metrics plus run summary
};

StructuredRunConfig default_grid_config();
StructuredRunConfig default_preference_config();

// Grid shortest paths. Each example's circuit is conditioned on its endpoint
// indicators; edge outputs are the free variables.
StructuredRunResult run_grid(const GridSpec& g, const Circuit& constraint, const Dataset& data,
                             const StructuredRunConfig& cfg);

// Sushi rankings: 36 ranking bits in, 16 total-order bits out.
StructuredRunResult run_preference(const Circuit& constraint, const Dataset& data, const StructuredRunConfig& cfg);

struct ToyRunConfig {
  TrainConfig train;
};

struct ToyRunResult {
  Mlp model;
  double unlabeled_accuracy = 0.0;  // %
  double unlabeled_entropy = 0.0;   // mean, nats
  // Decision boundary a*x + b*y + c = 0 of the linear classifier.
  double a = 0.0, b = 0.0, c = 0.0;
  nlohmann::json to_json() const;
};

ToyRunConfig default_toy_config();

// Linear softmax classifier on the 2D toy set; the regularizer acts on all
// rows, cross entropy on the labeled ones only.
ToyRunResult run_toy(const Dataset& data, const ToyRunConfig& cfg);

}  // namespace semloss
