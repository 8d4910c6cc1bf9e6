#include "cohexp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cohexp/error.hpp"
#include "cohexp/functor.hpp"
#include "cohexp/random.hpp"

namespace cohexp {

namespace {

constexpr double kXorBand = 0.1;
constexpr double kRegionMargin = 0.05;
constexpr double kConcentratedShare = 0.8;

std::uint64_t split_seed(std::uint64_t seed, Split split) {
  return splitmix64(seed ^ (0xa0761d6478bd642fULL * (static_cast<std::uint64_t>(split) + 1)));
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  double t = ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy);
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  // Width counts code points so the UTF-8 connectives line up.
  std::size_t cp = 0;
  for (unsigned char c : s) cp += (c & 0xC0) != 0x80;
  if (cp < width) s.append(width - cp, ' ');
  return s;
}

}  // namespace

std::string to_string(Setting s) { return s == Setting::Xor ? "xor" : "fuzzy-or"; }

std::string to_string(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "?";
}

Setting setting_from_string(const std::string& s) {
  if (s == "xor") return Setting::Xor;
  if (s == "fuzzy-or" || s == "fuzzy_or" || s == "or") return Setting::FuzzyOr;
  throw DomainError("unknown setting \"" + s + "\" (expected xor or fuzzy-or)");
}

Batch Dataset::to_batch() const {
  Batch b;
  b.inputs = features;
  b.targets.reserve(labels.size());
  for (auto l : labels) b.targets.push_back({static_cast<double>(l)});
  return b;
}

std::string Dataset::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "x,y,label\n";
  for (std::size_t i = 0; i < size(); ++i) {
    os << features[i][0] << ',' << features[i][1] << ',' << int(labels[i]) << '\n';
  }
  return os.str();
}

std::uint8_t true_label(Setting s, double x, double y) {
  const bool bx = x >= 0.5, by = y >= 0.5;
  if (s == Setting::Xor) return bx != by;
  return std::min(1.0, x + y) >= 0.5;
}

double distance_to_region_t(double x, double y) {
  if (x + y >= 0.5 && x <= 0.5 && y <= 0.5) return 0.0;
  return std::min({segment_distance(x, y, 0.5, 0.0, 0.0, 0.5), segment_distance(x, y, 0.0, 0.5, 0.5, 0.5),
                   segment_distance(x, y, 0.5, 0.5, 0.5, 0.0)});
}

bool near_xor_boundary(double x, double y) {
  return std::abs(x - 0.5) <= kXorBand || std::abs(y - 0.5) <= kXorBand;
}

bool near_region_t(double x, double y) { return distance_to_region_t(x, y) <= kRegionMargin; }

Dataset make_dataset(Setting setting, Split split, std::size_t size, std::uint64_t seed) {
  if (size < 1) throw DomainError("make_dataset: size must be >= 1");
  Dataset d{setting, split, seed, {}, {}};
  d.features.reserve(size);
  Rng rng(split_seed(seed, split));
  auto push = [&](double x, double y) { d.features.push_back({x, y}); };

  if (split != Split::Test) {
    for (std::size_t i = 0; i < size; ++i) {
      const double x = rng.uniform();
      push(x, rng.uniform());
    }
  } else if (setting == Setting::Xor) {
    while (d.features.size() < size) {
      const double x = rng.uniform();
      const double y = rng.uniform();
      if (near_xor_boundary(x, y)) push(x, y);
    }
  } else {
    const auto near = static_cast<std::size_t>(std::llround(kConcentratedShare * static_cast<double>(size)));
    const double hi = 0.5 + kRegionMargin;
    while (d.features.size() < near) {
      const double x = rng.uniform(0.0, hi);
      const double y = rng.uniform(0.0, hi);
      if (near_region_t(x, y)) push(x, y);
    }
    while (d.features.size() < size) {
      const double x = rng.uniform();
      push(x, rng.uniform());
    }
    rng.shuffle(d.features);
  }
  for (const auto& p : d.features) d.labels.push_back(true_label(setting, p[0], p[1]));
  return d;
}

SplitMetrics evaluate(const Expr& model, const Dataset& data, const Projection& p) {
  if (model.in_arity() != 2 || model.out_arity() != 1) {
    throw StructuralError("evaluate: model must map 2 inputs to 1 output");
  }
  SplitMetrics m{data.size(), 0.0, 0.0};
  std::size_t correct = 0, coherent = 0;
  Point y(1), dx(2), ydx(1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.features[i];
    model.eval_into(x, y);
    dx[0] = p.apply(x[0]);
    dx[1] = p.apply(x[1]);
    model.eval_into(dx, ydx);
    const double py = p.apply(y[0]);
    correct += py == static_cast<double>(data.labels[i]);
    coherent += py == p.apply(ydx[0]);
  }
  if (data.size() > 0) {
    m.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    m.coherency = static_cast<double>(coherent) / static_cast<double>(data.size());
  }
  return m;
}

const ClassExplanation& Explanation::for_label(int label) const {
  for (const auto& c : classes) {
    if (c.label == label) return c;
  }
  throw StructuralError("explanation has no class " + std::to_string(label));
}

Explanation extract_and_score(const Expr& model, const Dataset& data, const Projection& p,
                              const std::optional<GammaSpec>& gamma, bool simplify) {
  if (model.in_arity() != 2 || model.out_arity() != 1) {
    throw StructuralError("extract_and_score: model must map 2 inputs to 1 output");
  }
  if (!p.is_boolean()) throw DomainError("extract_and_score: projection image must be {0,1}");
  Expr explained = model;
  if (gamma) {
    if (!gamma->is_extension()) throw ContractError("extract_and_score: only domain extension adds the nc feature");
    explained = gamma_extend(model, *gamma);
  }
  const bool extended = explained.in_arity() == 3;

  const TruthTable table = booleanize(explained, p);
  std::vector<std::string> names{"x", "y"};
  if (extended) names.push_back("nc");
  DnfFormula positive = table_to_dnf(table, simplify);
  DnfFormula negative = table_to_dnf(table.negated(), simplify);
  positive.set_names(names);
  negative.set_names(names);

  Explanation out;
  out.extended = extended;
  out.names = names;
  std::size_t agree1 = 0, agree0 = 0;
  Point y(1), dx(2), ydx(1);
  BoolVector v(names.size());
  for (const auto& x : data.features) {
    model.eval_into(x, y);
    dx[0] = p.apply(x[0]);
    dx[1] = p.apply(x[1]);
    const bool decision = p.apply(y[0]) == 1.0;
    v[0] = dx[0] == 1.0;
    v[1] = dx[1] == 1.0;
    if (extended) {
      model.eval_into(dx, ydx);
      const bool nc = p.apply(y[0]) != p.apply(ydx[0]);
      out.flagged += nc;
      v[2] = nc && decision;
    }
    agree1 += positive.evaluate(0, v) == decision;
    agree0 += negative.evaluate(0, v) == !decision;
  }
  const double n = static_cast<double>(std::max<std::size_t>(data.size(), 1));
  out.classes.push_back({1, positive.render(0), positive.render(0, Notation::Ascii), agree1 / n});
  out.classes.push_back({0, negative.render(0), negative.render(0, Notation::Ascii), agree0 / n});
  return out;
}

ExperimentConfig ExperimentConfig::defaults(Setting setting, std::uint64_t seed) {
  ExperimentConfig c;
  c.setting = setting;
  c.train.seed = seed;
  if (setting == Setting::Xor) {
    c.train.hidden_sizes = {16, 16};
    c.train.learning_rate = 0.1;
    c.train.coherence_lambda = 1.0;
    c.train.epochs = 1000;
    c.train.early_stopping_patience = 200;
  } else {
    c.train.hidden_sizes = {16, 16};
    c.train.learning_rate = 0.1;
    c.train.coherence_lambda = 0.0;
    c.train.epochs = 500;
    c.train.early_stopping_patience = 100;
  }
  return c;
}

ExperimentRun run_experiment(const ExperimentConfig& cfg) {
  cfg.train.validate();
  const std::uint64_t seed = cfg.train.seed;
  Dataset train_set = make_dataset(cfg.setting, Split::Train, cfg.train_size, seed);
  Dataset val_set = make_dataset(cfg.setting, Split::Val, cfg.val_size, seed);
  Dataset test_set = make_dataset(cfg.setting, Split::Test, cfg.test_size, seed);

  TrainResult trained = train_detailed(cfg.train, train_set.to_batch(), val_set.to_batch());
  const Expr model = Expr::mlp(std::make_shared<const MlpModel>(trained.model));
  const Projection& p = cfg.train.projection;

  MetricsReport r;
  r.setting = cfg.setting;
  r.seed = seed;
  r.train = evaluate(model, train_set, p);
  r.val = evaluate(model, val_set, p);
  r.test = evaluate(model, test_set, p);
  r.epochs_run = trained.epochs_run;
  r.best_epoch = trained.best_epoch;
  r.naive = extract_and_score(model, test_set, p, std::nullopt, cfg.simplify);
  if (cfg.setting == Setting::FuzzyOr) {
    r.extended = extract_and_score(model, test_set, p, GammaSpec::domain_extension(p), cfg.simplify);
  }
  return ExperimentRun{std::move(r), std::move(trained.model), std::move(train_set), std::move(val_set),
                       std::move(test_set)};
}

Json train_config_to_json(const TrainConfig& cfg) {
  Json j{{"hidden_sizes", cfg.hidden_sizes},
         {"learning_rate", cfg.learning_rate},
         {"weight_decay", cfg.weight_decay},
         {"coherence_lambda", cfg.coherence_lambda},
         {"epochs", cfg.epochs},
         {"batch_size", cfg.batch_size},
         {"seed", cfg.seed},
         {"early_stopping_patience", cfg.early_stopping_patience}};
  j["projection"] = projection_to_json(cfg.projection);
  return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig base) {
  if (!j.is_object()) throw FormatError("train config must be an object");
  try {
    if (j.contains("hidden_sizes")) base.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
    if (j.contains("learning_rate")) base.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("weight_decay")) base.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("coherence_lambda")) base.coherence_lambda = j.at("coherence_lambda").get<double>();
    if (j.contains("epochs")) base.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) base.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("early_stopping_patience")) {
      base.early_stopping_patience = j.at("early_stopping_patience").get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("train config: ") + e.what());
  }
  if (j.contains("projection")) base.projection = projection_from_json(j.at("projection"));
  return base;
}

Json experiment_config_to_json(const ExperimentConfig& cfg) {
  return Json{{"setting", to_string(cfg.setting)},
              {"train_size", cfg.train_size},
              {"val_size", cfg.val_size},
              {"test_size", cfg.test_size},
              {"simplify", cfg.simplify},
              {"train", train_config_to_json(cfg.train)}};
}

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base) {
  if (!j.is_object()) throw FormatError("experiment config must be an object");
  try {
    if (j.contains("setting")) base.setting = setting_from_string(j.at("setting").get<std::string>());
    if (j.contains("train_size")) base.train_size = j.at("train_size").get<std::size_t>();
    if (j.contains("val_size")) base.val_size = j.at("val_size").get<std::size_t>();
    if (j.contains("test_size")) base.test_size = j.at("test_size").get<std::size_t>();
    if (j.contains("simplify")) base.simplify = j.at("simplify").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("experiment config: ") + e.what());
  }
  if (j.contains("train")) base.train = train_config_from_json(j.at("train"), base.train);
  return base;
}

namespace {

Json split_json(const SplitMetrics& m) {
  return Json{{"samples", m.samples}, {"accuracy", m.accuracy}, {"coherency", m.coherency}};
}

Json explanation_json(const Explanation& e) {
  Json classes = Json::array();
  for (const auto& c : e.classes) {
    classes.push_back({{"label", c.label},
                       {"formula", c.formula},
                       {"formula_ascii", c.formula_ascii},
                       {"fidelity", c.fidelity}});
  }
  return Json{{"extended", e.extended}, {"variables", e.names}, {"flagged", e.flagged}, {"classes", classes}};
}

}  // namespace

Json metrics_to_json(const MetricsReport& r) {
  Json j{{"setting", to_string(r.setting)},
         {"seed", r.seed},
         {"epochs_run", r.epochs_run},
         {"best_epoch", r.best_epoch},
         {"splits", {{"train", split_json(r.train)}, {"val", split_json(r.val)}, {"test", split_json(r.test)}}},
         {"explanations", explanation_json(r.naive)}};
  if (r.extended) j["extended_explanations"] = explanation_json(*r.extended);
  j["metadata"] = {
      {"train_val_sampling", "uniform on [0,1]^2"},
      {"test_sampling", r.setting == Setting::Xor
                            ? "uniform on points within L-inf distance 0.1 of x = 0.5 or y = 0.5"
                            : "80% within Euclidean distance 0.05 of T = {x+y >= 0.5, x <= 0.5, y <= 0.5}, 20% uniform"},
      {"projection", "threshold 0.5"},
      {"nc_binding", "nc = delta(model(x)) where the model is incoherent at x, else 0"}};
  return j;
}

std::string render_table(const MetricsReport& r) {
  std::ostringstream os;
  os << "setting: " << to_string(r.setting) << "   seed: " << r.seed << "   epochs: " << r.epochs_run
     << " (best " << r.best_epoch << ")\n\n";
  os << pad("", 14) << pad("train", 8) << pad("val", 8) << "test\n";
  os << pad("Accuracy", 14) << pad(percent(r.train.accuracy), 8) << pad(percent(r.val.accuracy), 8)
     << percent(r.test.accuracy) << '\n';
  os << pad("Coherency", 14) << pad(percent(r.train.coherency), 8) << pad(percent(r.val.coherency), 8)
     << percent(r.test.coherency) << "\n\n";

  auto block = [&](const char* title, const Explanation& e) {
    std::size_t width = 12;
    for (const auto& c : e.classes) {
      std::size_t cp = 0;
      for (unsigned char ch : c.formula) cp += (ch & 0xC0) != 0x80;
      width = std::max(width, cp + 2);
    }
    os << pad(title, 10 + width) << "Fidelity\n";
    for (const auto& c : e.classes) {
      os << pad("  class " + std::to_string(c.label), 10) << pad(c.formula, width) << percent(c.fidelity) << '\n';
    }
  };
  block("Explanations", r.naive);
  if (r.extended) {
    os << '\n';
    block("Extended (nc)", *r.extended);
    os << "  nc = 1 on " << r.extended->flagged << " of " << r.test.samples << " test samples\n";
  }
  return os.str();
}

}  // namespace cohexp
