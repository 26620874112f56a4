#ifndef SPX_LEARNING_HPP
#define SPX_LEARNING_HPP

#include <span>
#include <string>
#include <utility>

#include "spx/common.hpp"
#include "spx/data.hpp"
#include "spx/rng.hpp"

namespace spx {

enum class ModelKind { linear_regression, logistic_softmax, mlp_1hidden };

/// Flat-parameter model. Canonical layout is layer-major with row-major
/// weight matrices followed by the layer bias, so compressed-entry indices
/// stay stable across runs:
///   linear_regression / logistic_softmax: W (d_out x d_in), b (d_out)
///   mlp_1hidden: W1 (hidden x d_in), b1, W2 (d_out x hidden), b2 (tanh units)
/// linear_regression is scalar-output (d_out = 1) against the label value.
struct Model {
  ModelKind kind = ModelKind::logistic_softmax;
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  std::size_t hidden = 0;  // mlp only
  ParamVector params;

  static std::size_t param_count(ModelKind kind, std::size_t d_in, std::size_t d_out,
                                 std::size_t hidden);
  static Model make(ModelKind kind, std::size_t d_in, std::size_t d_out, std::size_t hidden = 0);
};

/// Shared random initialization (uniform Xavier for weights, zero biases).
ParamVector init_params(const Model& shape, Rng& rng);

/// View of a minibatch: row indices into a dataset.
struct Batch {
  const LabeledDataset* data = nullptr;
  std::span<const uint32_t> rows;
};

/// Mean loss over the batch and the exact analytic gradient of that mean.
/// Squared error (1/2 ||y_hat - y||^2 per sample) for regression,
/// softmax cross-entropy (natural log) for classifiers.
std::pair<double, ParamVector> loss_and_grad(const Model& m, const Batch& batch);

/// Learning-rate schedule: initial value with multiplicative drops applied
/// from the given epoch onward.
struct LrSchedule {
  double initial = 0.1;
  std::vector<std::pair<std::size_t, double>> drops;  // (epoch, multiplier)

  double at(std::size_t epoch) const {
    double g = initial;
    for (const auto& [e, mult] : drops)
      if (epoch >= e) g *= mult;
    return g;
  }
};

struct SgdConfig {
  LrSchedule gamma;
  double momentum = 0.0;
  double weight_decay = 0.0;
  std::size_t batch_size = 32;

  void validate() const;
};

/// One local step: buf' = momentum*buf + (grad + weight_decay*x),
/// x_hat = x - gamma(epoch)*buf'. Returns x_hat; buf is updated in place.
ParamVector sgd_step(const ParamVector& x, const ParamVector& grad, ParamVector& momentum_buf,
                     const SgdConfig& cfg, std::size_t epoch);

/// Classification accuracy in [0,1] (argmax, ties to the lowest class id),
/// or mean squared error for regression models.
double evaluate(const Model& m, const LabeledDataset& test_set);

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind k);

}  // namespace spx

#endif
