#pragma once

// The two synthetic classification settings: XOR, and the fuzzy OR given by
// the Lukasiewicz t-conorm whose incoherence region is the triangle
// T = {x + y >= 0.5, x <= 0.5, y <= 0.5}.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cohexp/gamma.hpp"
#include "cohexp/nn.hpp"
#include "cohexp/serialize.hpp"

namespace cohexp {

enum class Setting { Xor, FuzzyOr };
enum class Split { Train, Val, Test };

std::string to_string(Setting s);
std::string to_string(Split s);
Setting setting_from_string(const std::string& s);

struct Dataset {
  Setting setting = Setting::Xor;
  Split split = Split::Train;
  std::uint64_t seed = 0;
  std::vector<Point> features;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return features.size(); }
  Batch to_batch() const;
  /// "x,y,label" rows with a header line.
  std::string to_csv() const;
};

/// Ground-truth label under Threshold(0.5).
std::uint8_t true_label(Setting s, double x, double y);
/// Euclidean distance from (x, y) to the triangle T; 0 inside.
double distance_to_region_t(double x, double y);
/// Test-set predicates.
bool near_xor_boundary(double x, double y);  // within 0.1 (L-inf) of x = 0.5 or y = 0.5
bool near_region_t(double x, double y);      // within 0.05 of T

/// Train and validation points are uniform on [0,1]^2. Test points are
/// concentrated: for Xor all of them satisfy near_xor_boundary, for FuzzyOr
/// 80% satisfy near_region_t and the rest are uniform.
Dataset make_dataset(Setting setting, Split split, std::size_t size, std::uint64_t seed);

struct SplitMetrics {
  std::size_t samples = 0;
  double accuracy = 0.0;
  double coherency = 0.0;
};

/// Accuracy of delta(model output) against the labels, and the fraction of
/// samples where the model is delta-coherent.
SplitMetrics evaluate(const Expr& model, const Dataset& data, const Projection& p);

struct ClassExplanation {
  int label = 1;
  std::string formula;
  std::string formula_ascii;
  double fidelity = 0.0;
};

struct Explanation {
  bool extended = false;
  std::vector<std::string> names;
  std::vector<ClassExplanation> classes;  // label 1 first, then label 0
  std::size_t flagged = 0;                // test samples with nc = 1

  const ClassExplanation& for_label(int label) const;
};

/// Booleanizes the model (or its domain extension when `gamma` is given) and
/// scores the class formulas on `data`. The class-0 formula is the DNF of the
/// negated table. With a domain extension the extra variable is named "nc"
/// and bound per sample to delta(model(x)) when the model is incoherent at x,
/// and to 0 otherwise.
Explanation extract_and_score(const Expr& model, const Dataset& data, const Projection& p,
                              const std::optional<GammaSpec>& gamma, bool simplify = true);

struct ExperimentConfig {
  Setting setting = Setting::Xor;
  TrainConfig train;
  std::size_t train_size = 1000;
  std::size_t val_size = 250;
  std::size_t test_size = 1000;
  bool simplify = true;

  /// Tuned defaults for each setting.
  static ExperimentConfig defaults(Setting setting, std::uint64_t seed = 0);
};

struct MetricsReport {
  Setting setting = Setting::Xor;
  std::uint64_t seed = 0;
  SplitMetrics train;
  SplitMetrics val;
  SplitMetrics test;
  int epochs_run = 0;
  int best_epoch = 0;
  Explanation naive;
  std::optional<Explanation> extended;  // FuzzyOr only
};

struct ExperimentRun {
  MetricsReport report;
  MlpModel model;
  Dataset train;
  Dataset val;
  Dataset test;
};

ExperimentRun run_experiment(const ExperimentConfig& cfg);

Json train_config_to_json(const TrainConfig& cfg);
/// Fields missing from `j` keep the values already in `base`.
TrainConfig train_config_from_json(const Json& j, TrainConfig base);
Json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base);

Json metrics_to_json(const MetricsReport& r);
/// Plain-text results table with one row per metric, percentages
/// with one decimal.
std::string render_table(const MetricsReport& r);

}  // namespace cohexp
