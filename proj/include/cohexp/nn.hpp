#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cohexp/projection.hpp"

namespace cohexp {

enum class Activation { PReLU, Sigmoid };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // row-major, out x in
  std::vector<double> bias;
  Activation activation = Activation::PReLU;
  double slope = 0.25;  // PReLU negative-side slope, one per layer
};

/// Dense feedforward classifier: PReLU hidden layers and a sigmoid output
/// layer, so every output lies in (0,1) and the model is usable as a fuzzy
/// function.
class MlpModel {
 public:
  explicit MlpModel(std::vector<DenseLayer> layers);

  /// Glorot-uniform weights, zero biases, PReLU slopes at 0.25.
  static MlpModel initialize(std::size_t in_arity, const std::vector<std::size_t>& hidden,
                             std::size_t out_arity, std::uint64_t seed);

  std::size_t in_arity() const { return layers_.front().in; }
  std::size_t out_arity() const { return layers_.back().out; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Point forward(std::span<const double> x) const;
  void forward_into(std::span<const double> x, std::span<double> out) const;
  /// Pre-sigmoid outputs of the final layer.
  Point logits(std::span<const double> x) const;

  std::size_t parameter_count() const;
  /// Flattened parameters: per layer weights, bias, then slope for PReLU.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);

  friend bool operator==(const MlpModel& a, const MlpModel& b);

 private:
  std::vector<DenseLayer> layers_;
};

/// Supervised examples; targets hold one {0,1} label per output.
struct Batch {
  std::vector<Point> inputs;
  std::vector<Point> targets;

  std::size_t size() const { return inputs.size(); }
};

struct TrainConfig {
  std::vector<std::size_t> hidden_sizes{16, 16};
  double learning_rate = 0.5;
  double weight_decay = 0.0;
  double coherence_lambda = 0.0;
  int epochs = 500;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  int early_stopping_patience = 100;
  Projection projection = Projection::threshold(0.5);

  void validate() const;
};

struct LossTerms {
  double cross_entropy = 0.0;
  double decay = 0.0;
  double coherence = 0.0;  // unweighted mean |f(x) - f(delta(x))|
  double total = 0.0;
};

LossTerms loss_terms(const MlpModel& m, const Batch& batch, const TrainConfig& cfg);
double loss(const MlpModel& m, const Batch& batch, const TrainConfig& cfg);

/// Analytic gradient of loss() with respect to parameters().
std::vector<double> loss_gradient(const MlpModel& m, const Batch& batch, const TrainConfig& cfg);

/// Central-difference gradient of loss() with step `h`.
std::vector<double> numeric_gradient(const MlpModel& m, const Batch& batch,
                                     const TrainConfig& cfg, double h = 1e-5);

/// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double gradient_check(const MlpModel& m, const Batch& batch, const TrainConfig& cfg);

/// Fraction of samples whose projected outputs all match their targets.
double accuracy(const MlpModel& m, const Batch& batch, const Projection& p);

struct TrainResult {
  MlpModel model;
  int epochs_run = 0;
  int best_epoch = 0;  // 0 means the initialization was never beaten
  double best_val_accuracy = 0.0;
};

/// Minibatch gradient descent with early stopping on validation accuracy
/// (ties broken by validation loss). Returns the best model seen.
TrainResult train_detailed(const TrainConfig& cfg, const Batch& train_set, const Batch& val_set);
MlpModel train(const TrainConfig& cfg, const Batch& train_set, const Batch& val_set);

}  // namespace cohexp
