#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace semloss {

enum class OutputActivation : std::uint8_t { Sigmoid, Softmax };

// Fully connected network with sigmoid hidden units. Inputs are batched as
// rows. All parameters live in one flat vector so optimizers and
// finite-difference checks can treat them uniformly.
class Mlp {
 public:
  using Matrix = Eigen::MatrixXd;
  using WeightMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstWeightMap = Eigen::Map<const Eigen::MatrixXd>;
  using BiasMap = Eigen::Map<Eigen::RowVectorXd>;
  using ConstBiasMap = Eigen::Map<const Eigen::RowVectorXd>;

  // layer_sizes = {inputs, hidden..., outputs}. Parameters start at zero.
  Mlp(std::vector<std::size_t> layer_sizes, OutputActivation output);

  // Weights uniform in [-r, r], r = sqrt(6 / (fan_in + fan_out)); biases 0.
  static Mlp glorot(std::vector<std::size_t> layer_sizes, OutputActivation output, std::mt19937_64& rng);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  OutputActivation output_activation() const { return output_; }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Layer l maps sizes[l] -> sizes[l+1]: Z = A * W + b.
  WeightMap weight(std::size_t l);
  ConstWeightMap weight(std::size_t l) const;
  BiasMap bias(std::size_t l);
  ConstBiasMap bias(std::size_t l) const;

  // Activations of every layer, inputs first; the last entry holds the
  // output-layer pre-activations (logits).
  struct Tape {
    std::vector<Matrix> activations;
    Matrix logits() const { return activations.back(); }
  };

  Tape forward_tape(const Matrix& inputs) const;
  Matrix logits(const Matrix& inputs) const { return forward_tape(inputs).logits(); }
  // Output probabilities, one row per input row.
  Matrix forward(const Matrix& inputs) const;
  // Single example.
  Eigen::VectorXd predict(const Eigen::VectorXd& x) const;

  // Gradient of a scalar loss w.r.t. params, given dLoss/dLogits.
  Eigen::VectorXd backward(const Tape& tape, const Matrix& dlogits) const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  std::vector<std::size_t> sizes_;
  OutputActivation output_;
  std::vector<std::size_t> w_offset_, b_offset_;
  Eigen::VectorXd params_;
};

Eigen::MatrixXd output_probabilities(const Eigen::MatrixXd& logits, OutputActivation act);

// Adam on a flat parameter vector.
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam(std::size_t num_params, Options opts);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  Options opts_;
  Eigen::VectorXd m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace semloss
