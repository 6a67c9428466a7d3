#include "semloss/mlp.hpp"

#include <cmath>

#include "semloss/logic.hpp"

namespace semloss {
namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
  });
}

}  // namespace

Eigen::MatrixXd output_probabilities(const Eigen::MatrixXd& logits, OutputActivation act) {
  if (act == OutputActivation::Sigmoid) return sigmoid(logits);
  Eigen::MatrixXd p = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, OutputActivation output)
    : sizes_(std::move(layer_sizes)), output_(output) {
  if (sizes_.size() < 2) throw InputError("an MLP needs at least input and output sizes");
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw InputError("layer sizes must be positive");
    w_offset_.push_back(off);
    off += sizes_[l] * sizes_[l + 1];
    b_offset_.push_back(off);
    off += sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(off));
}

Mlp Mlp::glorot(std::vector<std::size_t> layer_sizes, OutputActivation output, std::mt19937_64& rng) {
  Mlp m(std::move(layer_sizes), output);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    double r = std::sqrt(6.0 / static_cast<double>(m.sizes_[l] + m.sizes_[l + 1]));
    std::uniform_real_distribution<double> u(-r, r);
    auto w = m.weight(l);
    // Fill row-major so the draw order matches the checkpoint layout.
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
  }
  return m;
}

Mlp::WeightMap Mlp::weight(std::size_t l) {
  return {params_.data() + w_offset_[l], static_cast<Eigen::Index>(sizes_[l]), static_cast<Eigen::Index>(sizes_[l + 1])};
}
Mlp::ConstWeightMap Mlp::weight(std::size_t l) const {
  return {params_.data() + w_offset_[l], static_cast<Eigen::Index>(sizes_[l]), static_cast<Eigen::Index>(sizes_[l + 1])};
}
Mlp::BiasMap Mlp::bias(std::size_t l) {
  return {params_.data() + b_offset_[l], static_cast<Eigen::Index>(sizes_[l + 1])};
}
Mlp::ConstBiasMap Mlp::bias(std::size_t l) const {
  return {params_.data() + b_offset_[l], static_cast<Eigen::Index>(sizes_[l + 1])};
}

Mlp::Tape Mlp::forward_tape(const Matrix& inputs) const {
  if (static_cast<std::size_t>(inputs.cols()) != input_size())
    throw InputError("input has " + std::to_string(inputs.cols()) + " features, network expects " +
                     std::to_string(input_size()));
  Tape tape;
  tape.activations.reserve(num_layers() + 1);
  tape.activations.push_back(inputs);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix z = tape.activations.back() * weight(l);
    z.rowwise() += bias(l);
    if (!z.allFinite()) throw ComputeError("non-finite activation in layer " + std::to_string(l));
    tape.activations.push_back(l + 1 < num_layers() ? sigmoid(z) : std::move(z));
  }
  return tape;
}

Mlp::Matrix Mlp::forward(const Matrix& inputs) const {
  return output_probabilities(forward_tape(inputs).logits(), output_);
}

Eigen::VectorXd Mlp::predict(const Eigen::VectorXd& x) const {
  return forward(Matrix(x.transpose())).row(0).transpose();
}

Eigen::VectorXd Mlp::backward(const Tape& tape, const Matrix& dlogits) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  Matrix delta = dlogits;
  for (std::size_t l = num_layers(); l-- > 0;) {
    const Matrix& a = tape.activations[l];
    Eigen::Map<Matrix> gw(grad.data() + w_offset_[l], static_cast<Eigen::Index>(sizes_[l]),
                          static_cast<Eigen::Index>(sizes_[l + 1]));
    Eigen::Map<Eigen::RowVectorXd> gb(grad.data() + b_offset_[l], static_cast<Eigen::Index>(sizes_[l + 1]));
    gw.noalias() = a.transpose() * delta;
    gb = delta.colwise().sum();
    if (l > 0) {
      Matrix back = delta * weight(l).transpose();
      delta = back.array() * a.array() * (1.0 - a.array());
    }
  }
  return grad;
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < num_layers(); ++l) {
    auto w = weight(l);
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) flat.push_back(w(i, j));
    auto b = bias(l);
    layers.push_back({{"weights", flat}, {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  return {{"layer_sizes", sizes_},
          {"output", output_ == OutputActivation::Sigmoid ? "sigmoid" : "softmax"},
          {"layers", layers}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  try {
    auto act = j.at("output").get<std::string>() == "softmax" ? OutputActivation::Softmax : OutputActivation::Sigmoid;
    Mlp m(j.at("layer_sizes").get<std::vector<std::size_t>>(), act);
    const auto& layers = j.at("layers");
    if (layers.size() != m.num_layers()) throw InputError("checkpoint layer count mismatch");
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
      auto flat = layers[l].at("weights").get<std::vector<double>>();
      auto b = layers[l].at("bias").get<std::vector<double>>();
      auto w = m.weight(l);
      if (flat.size() != static_cast<std::size_t>(w.size()) || b.size() != static_cast<std::size_t>(w.cols()))
        throw InputError("checkpoint layer " + std::to_string(l) + " has the wrong shape");
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(i, c) = flat[static_cast<std::size_t>(i * w.cols() + c)];
      m.bias(l) = Eigen::Map<const Eigen::RowVectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad model checkpoint: ") + e.what());
  }
}

Adam::Adam(std::size_t num_params, Options opts)
    : opts_(opts),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = opts_.beta1 * m_ + (1.0 - opts_.beta1) * grad;
  v_ = opts_.beta2 * v_ + (1.0 - opts_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  params.array() -= opts_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + opts_.epsilon);
}

}  // namespace semloss
