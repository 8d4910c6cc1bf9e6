#include "cohexp/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cohexp/error.hpp"
#include "cohexp/random.hpp"

namespace cohexp {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double prelu(double z, double slope) { return z > 0.0 ? z : slope * z; }

// Per-layer values kept for backprop.
struct Trace {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // pre-activation of each layer
};

std::vector<double> run(const std::vector<DenseLayer>& layers, std::span<const double> x, Trace* trace) {
  std::vector<double> a(x.begin(), x.end());
  for (const auto& L : layers) {
    std::vector<double> z(L.out);
    for (std::size_t r = 0; r < L.out; ++r) {
      double v = L.bias[r];
      const double* w = &L.weights[r * L.in];
      for (std::size_t k = 0; k < L.in; ++k) v += w[k] * a[k];
      z[r] = v;
    }
    if (trace) {
      trace->inputs.push_back(a);
      trace->pre.push_back(z);
    }
    if (L.activation == Activation::PReLU) {
      for (auto& v : z) v = prelu(v, L.slope);
    } else {
      for (auto& v : z) v = sigmoid(v);
    }
    a = std::move(z);
  }
  return a;
}

// Accumulates d(loss)/d(params) given d(loss)/d(final pre-activation).
void backprop(const std::vector<DenseLayer>& layers, const Trace& t, std::vector<double> delta,
              std::vector<double>& grad, const std::vector<std::size_t>& offsets) {
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& L = layers[li];
    const auto& in = t.inputs[li];
    double* gw = &grad[offsets[li]];
    double* gb = gw + L.out * L.in;
    for (std::size_t r = 0; r < L.out; ++r) {
      for (std::size_t k = 0; k < L.in; ++k) gw[r * L.in + k] += delta[r] * in[k];
      gb[r] += delta[r];
    }
    if (li == 0) break;
    // Propagate into the previous layer's pre-activation through its PReLU.
    const auto& prev = layers[li - 1];
    const auto& prev_pre = t.pre[li - 1];
    std::vector<double> da(L.in, 0.0);
    for (std::size_t r = 0; r < L.out; ++r) {
      for (std::size_t k = 0; k < L.in; ++k) da[k] += delta[r] * L.weights[r * L.in + k];
    }
    std::vector<double> next(L.in);
    double* gslope = &grad[offsets[li - 1] + prev.out * prev.in + prev.out];
    for (std::size_t k = 0; k < L.in; ++k) {
      const double z = prev_pre[k];
      if (z > 0.0) {
        next[k] = da[k];
      } else {
        next[k] = da[k] * prev.slope;
        *gslope += da[k] * z;
      }
    }
    delta = std::move(next);
  }
}

std::vector<std::size_t> layer_offsets(const std::vector<DenseLayer>& layers) {
  std::vector<std::size_t> off;
  std::size_t pos = 0;
  for (const auto& L : layers) {
    off.push_back(pos);
    pos += L.out * L.in + L.out + (L.activation == Activation::PReLU ? 1 : 0);
  }
  off.push_back(pos);
  return off;
}

void check_batch(const MlpModel& m, const Batch& b) {
  if (b.inputs.size() != b.targets.size()) throw StructuralError("batch: inputs and targets differ in length");
  for (std::size_t s = 0; s < b.size(); ++s) {
    if (b.inputs[s].size() != m.in_arity()) throw StructuralError("batch: feature dimension mismatch");
    if (b.targets[s].size() != m.out_arity()) throw StructuralError("batch: target dimension mismatch");
  }
}

}  // namespace

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw StructuralError("mlp: no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& L = layers_[i];
    if (L.in == 0 || L.out == 0) throw StructuralError("mlp: empty layer");
    if (L.weights.size() != L.in * L.out || L.bias.size() != L.out) {
      throw StructuralError("mlp: layer parameter shape mismatch");
    }
    if (i > 0 && layers_[i - 1].out != L.in) throw StructuralError("mlp: layer dimensions do not chain");
    const bool last = i + 1 == layers_.size();
    if (last != (L.activation == Activation::Sigmoid)) {
      throw StructuralError("mlp: sigmoid must be the activation of the final layer only");
    }
  }
}

MlpModel MlpModel::initialize(std::size_t in_arity, const std::vector<std::size_t>& hidden,
                              std::size_t out_arity, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  std::size_t prev = in_arity;
  std::vector<std::size_t> sizes = hidden;
  sizes.push_back(out_arity);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    DenseLayer L;
    L.in = prev;
    L.out = sizes[i];
    const double limit = std::sqrt(6.0 / static_cast<double>(L.in + L.out));
    L.weights.resize(L.in * L.out);
    for (auto& w : L.weights) w = rng.uniform(-limit, limit);
    L.bias.assign(L.out, 0.0);
    L.activation = i + 1 == sizes.size() ? Activation::Sigmoid : Activation::PReLU;
    L.slope = 0.25;
    layers.push_back(std::move(L));
    prev = sizes[i];
  }
  return MlpModel(std::move(layers));
}

Point MlpModel::forward(std::span<const double> x) const {
  if (x.size() != in_arity()) throw StructuralError("mlp forward: input arity mismatch");
  return run(layers_, x, nullptr);
}

void MlpModel::forward_into(std::span<const double> x, std::span<double> out) const {
  auto y = run(layers_, x, nullptr);
  std::copy(y.begin(), y.end(), out.begin());
}

Point MlpModel::logits(std::span<const double> x) const {
  if (x.size() != in_arity()) throw StructuralError("mlp logits: input arity mismatch");
  Trace t;
  run(layers_, x, &t);
  return t.pre.back();
}

std::size_t MlpModel::parameter_count() const { return layer_offsets(layers_).back(); }

std::vector<double> MlpModel::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (const auto& L : layers_) {
    p.insert(p.end(), L.weights.begin(), L.weights.end());
    p.insert(p.end(), L.bias.begin(), L.bias.end());
    if (L.activation == Activation::PReLU) p.push_back(L.slope);
  }
  return p;
}

void MlpModel::set_parameters(std::span<const double> p) {
  if (p.size() != parameter_count()) throw StructuralError("mlp: parameter vector length mismatch");
  std::size_t pos = 0;
  for (auto& L : layers_) {
    std::copy_n(p.begin() + pos, L.weights.size(), L.weights.begin());
    pos += L.weights.size();
    std::copy_n(p.begin() + pos, L.bias.size(), L.bias.begin());
    pos += L.bias.size();
    if (L.activation == Activation::PReLU) L.slope = p[pos++];
  }
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& x = a.layers_[i];
    const auto& y = b.layers_[i];
    if (x.in != y.in || x.out != y.out || x.activation != y.activation || x.slope != y.slope ||
        x.weights != y.weights || x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

void TrainConfig::validate() const {
  for (auto h : hidden_sizes) {
    if (h == 0) throw DomainError("train config: hidden layer of size 0");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw DomainError("train config: learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw DomainError("train config: weight_decay must be >= 0");
  if (!(coherence_lambda >= 0.0)) throw DomainError("train config: coherence_lambda must be >= 0");
  if (epochs < 0) throw DomainError("train config: epochs must be >= 0");
  if (batch_size == 0) throw DomainError("train config: batch_size must be >= 1");
  if (early_stopping_patience < 1) throw DomainError("train config: patience must be >= 1");
}

LossTerms loss_terms(const MlpModel& m, const Batch& batch, const TrainConfig& cfg) {
  check_batch(m, batch);
  LossTerms t;
  const std::size_t n = batch.size();
  if (n == 0) return t;
  const double denom = static_cast<double>(n * m.out_arity());
  for (std::size_t s = 0; s < n; ++s) {
    Trace tr;
    const auto p = run(m.layers(), batch.inputs[s], &tr);
    const auto& z = tr.pre.back();
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double y = batch.targets[s][k];
      t.cross_entropy += softplus(z[k]) - y * z[k];
    }
    const Point dx = cfg.projection.apply(batch.inputs[s]);
    const auto pd = run(m.layers(), dx, nullptr);
    for (std::size_t k = 0; k < p.size(); ++k) t.coherence += std::abs(p[k] - pd[k]);
  }
  t.cross_entropy /= denom;
  t.coherence /= denom;
  for (const auto& L : m.layers()) {
    for (double w : L.weights) t.decay += w * w;
  }
  t.decay *= cfg.weight_decay;
  t.total = t.cross_entropy + t.decay + cfg.coherence_lambda * t.coherence;
  return t;
}

double loss(const MlpModel& m, const Batch& batch, const TrainConfig& cfg) {
  return loss_terms(m, batch, cfg).total;
}

std::vector<double> loss_gradient(const MlpModel& m, const Batch& batch, const TrainConfig& cfg) {
  check_batch(m, batch);
  const auto& layers = m.layers();
  const auto offsets = layer_offsets(layers);
  std::vector<double> grad(offsets.back(), 0.0);
  const std::size_t n = batch.size();
  if (n > 0) {
    const double denom = static_cast<double>(n * m.out_arity());
    const bool penalty = cfg.coherence_lambda > 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      Trace tr;
      const auto p = run(layers, batch.inputs[s], &tr);
      std::vector<double> delta(p.size());
      for (std::size_t k = 0; k < p.size(); ++k) delta[k] = (p[k] - batch.targets[s][k]) / denom;

      if (penalty) {
        const Point dx = cfg.projection.apply(batch.inputs[s]);
        Trace trd;
        const auto pd = run(layers, dx, &trd);
        std::vector<double> delta_d(p.size(), 0.0);
        bool any = false;
        for (std::size_t k = 0; k < p.size(); ++k) {
          const double diff = p[k] - pd[k];
          if (diff == 0.0) continue;
          const double sgn = diff > 0.0 ? 1.0 : -1.0;
          const double w = cfg.coherence_lambda * sgn / denom;
          delta[k] += w * p[k] * (1.0 - p[k]);
          delta_d[k] = -w * pd[k] * (1.0 - pd[k]);
          any = true;
        }
        if (any) backprop(layers, trd, std::move(delta_d), grad, offsets);
      }
      backprop(layers, tr, std::move(delta), grad, offsets);
    }
  }
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& L = layers[li];
    for (std::size_t i = 0; i < L.weights.size(); ++i) {
      grad[offsets[li] + i] += 2.0 * cfg.weight_decay * L.weights[i];
    }
  }
  return grad;
}

std::vector<double> numeric_gradient(const MlpModel& m, const Batch& batch, const TrainConfig& cfg,
                                     double h) {
  auto params = m.parameters();
  std::vector<double> grad(params.size());
  MlpModel probe = m;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params[i];
    params[i] = orig + h;
    probe.set_parameters(params);
    const double up = loss(probe, batch, cfg);
    params[i] = orig - h;
    probe.set_parameters(params);
    const double down = loss(probe, batch, cfg);
    params[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double gradient_check(const MlpModel& m, const Batch& batch, const TrainConfig& cfg) {
  const auto a = loss_gradient(m, batch, cfg);
  const auto n = numeric_gradient(m, batch, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(n[i]), 1e-8});
    worst = std::max(worst, std::abs(a[i] - n[i]) / scale);
  }
  return worst;
}

double accuracy(const MlpModel& m, const Batch& batch, const Projection& p) {
  check_batch(m, batch);
  if (batch.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto out = m.forward(batch.inputs[s]);
    bool ok = true;
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (p.apply(out[k]) != batch.targets[s][k]) ok = false;
    }
    hits += ok ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

TrainResult train_detailed(const TrainConfig& cfg, const Batch& train_set, const Batch& val_set) {
  cfg.validate();
  if (train_set.size() == 0 || val_set.size() == 0) throw DomainError("train: empty dataset");
  const std::size_t in = train_set.inputs.front().size();
  const std::size_t out = train_set.targets.front().size();
  MlpModel model = MlpModel::initialize(in, cfg.hidden_sizes, out, cfg.seed);
  check_batch(model, train_set);
  check_batch(model, val_set);

  Rng rng(cfg.seed ^ 0x5eedf00dULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult best{model, 0, 0, accuracy(model, val_set, cfg.projection)};
  double best_val_loss = loss(model, val_set, cfg);
  int since_improvement = 0;
  auto params = model.parameters();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      Batch mb;
      for (std::size_t i = start; i < stop; ++i) {
        mb.inputs.push_back(train_set.inputs[order[i]]);
        mb.targets.push_back(train_set.targets[order[i]]);
      }
      const auto g = loss_gradient(model, mb, cfg);
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.learning_rate * g[i];
      for (double v : params) {
        if (!std::isfinite(v)) throw TrainingError("training diverged: non-finite parameters", epoch);
      }
      model.set_parameters(params);
    }
    const double train_loss = loss(model, train_set, cfg);
    if (!std::isfinite(train_loss)) throw TrainingError("training diverged: non-finite loss", epoch);

    best.epochs_run = epoch;
    const double val_acc = accuracy(model, val_set, cfg.projection);
    const double val_loss = loss(model, val_set, cfg);
    if (val_acc > best.best_val_accuracy || (val_acc == best.best_val_accuracy && val_loss < best_val_loss)) {
      best.model = model;
      best.best_epoch = epoch;
      best.best_val_accuracy = val_acc;
      best_val_loss = val_loss;
      since_improvement = 0;
    } else if (++since_improvement >= cfg.early_stopping_patience) {
      break;
    }
  }
  return best;
}

MlpModel train(const TrainConfig& cfg, const Batch& train_set, const Batch& val_set) {
  return train_detailed(cfg, train_set, val_set).model;
}

}  // namespace cohexp
