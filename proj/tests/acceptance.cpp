// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances and time limits are fixed below.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "cohexp/coherence.hpp"
#include "cohexp/dnf.hpp"
#include "cohexp/experiments.hpp"
#include "cohexp/functor.hpp"
#include "cohexp/gamma.hpp"
#include "cohexp/nn.hpp"
#include "cohexp/random.hpp"
#include "support/corpus.hpp"

using namespace cohexp;

namespace {

constexpr double kFractionTolerance = 0.01;
constexpr double kGradientTolerance = 1e-4;
constexpr double kRawTolerance = 1e-12;
constexpr double kCoherencyGap = 0.15;
constexpr double kXorAccuracyFloor = 0.90;
constexpr double kXorCoherencyFloor = 0.90;

constexpr double kLimitGridSeconds = 1.0;
constexpr double kLimitFunctorSeconds = 10.0;
constexpr double kLimitExperimentSeconds = 60.0;

const Projection kHalf = Projection::threshold(0.5);

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  failures += !o.pass;
  std::printf("%s %2d %s:%s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.str().c_str());
  std::fflush(stdout);
}

SamplingSpec independent_sample(std::size_t arity) {
  return arity <= 2 ? SamplingSpec::random(20000, 0xC0FFEE) : SamplingSpec::random(40000, 0xC0FFEE);
}

void grid_oracle(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Expr f = Expr::tconorm(TConormKind::Lukasiewicz);
  const auto report = check_coherence(f, kHalf, SamplingSpec::grid(201));
  // Exact integer oracle on grid indices: x = i/200, y = j/200. The closed
  // triangle's edges x = 0.5 and y = 0.5 project to 1 and stay coherent.
  std::size_t mismatches = 0;
  Point x(2);
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      x[0] = i / 200.0;
      x[1] = j / 200.0;
      const bool in_t = i + j >= 100 && i < 100 && j < 100;
      mismatches += is_coherent_at(f, kHalf, x, 0) == in_t;
    }
  }
  const double secs = seconds_since(t0);
  const double frac = report.per_component[0].fraction();
  o.detail << " fraction=" << frac << " mismatches=" << mismatches << " time=" << secs << "s";
  o.require(mismatches == 0, "incoherent set differs from T");
  o.require(std::abs(frac - 0.875) <= kFractionTolerance, "fraction outside 0.875 +/- 0.01");
  o.require(secs < kLimitGridSeconds, "runtime");
}

void counterexamples(Outcome& o) {
  const Expr luk_and = Expr::tnorm(TNormKind::Lukasiewicz);
  const double lo = kHalf.apply(luk_and({0.6, 0.6})[0]);
  const double hi = kHalf.apply(luk_and(kHalf.apply(Point{0.6, 0.6}))[0]);
  o.detail << " delta(0.6*0.6)=" << lo << " delta(1*1)=" << hi;
  o.require(lo == 0.0 && hi == 1.0, "t-norm example");
  const auto r = verify_functor_law(counterexample::low_high_step(), counterexample::positive_indicator(), kHalf);
  const auto* v = std::get_if<FunctorViolated>(&r);
  o.require(v != nullptr, "piecewise pair should violate the law");
  if (v) {
    o.detail << " vertex=(" << int(v->vertex[0]) << ") composite=" << int(v->composite[0])
             << " composed=" << int(v->composed[0]);
    o.require(v->vertex == BoolVector{0} && v->composite == BoolVector{1} && v->composed == BoolVector{0},
              "witness values");
  }
}

void functor_suite(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pairs = testing::coherent_pairs(400, 2024, 3);
  std::size_t holds = 0;
  for (const auto& [f, g] : pairs) holds += std::holds_alternative<FunctorHolds>(verify_functor_law(f, g, kHalf));
  bool identity = true;
  for (std::size_t n = 1; n <= 8; ++n) identity = identity && verify_identity_law(n, kHalf);
  const double secs = seconds_since(t0);
  o.detail << " pairs=" << pairs.size() << " holds=" << holds << " identity<=8=" << identity << " time=" << secs
           << "s";
  o.require(pairs.size() >= 200 && holds == pairs.size(), "composition law");
  o.require(identity, "identity law");
  o.require(secs < kLimitFunctorSeconds, "runtime");
}

void repair_theorems(Outcome& o) {
  const auto corpus = testing::incoherent_corpus(60, 77);
  std::size_t coherent_ok = 0, checked_points = 0, disagreements = 0;
  for (const auto& f : corpus) {
    const std::size_t n = f.in_arity();
    const auto ext = gamma_extend(f, GammaSpec::domain_extension(kHalf));
    const auto fallback = Expr::constant(n, std::vector<double>(f.out_arity(), 0.0));
    const auto mod = gamma_output_mod(f, GammaSpec::output_modification(fallback, kHalf));
    const bool a = check_coherence(ext, kHalf, independent_sample(ext.in_arity()), 0).fully_coherent();
    const bool b = check_coherence(mod, kHalf, independent_sample(n), 0).fully_coherent();
    coherent_ok += a && b;

    const auto sample = independent_sample(n);
    Point fx(f.out_arity()), ex(f.out_arity()), mx(f.out_arity()), xc(ext.in_arity(), 0.0);
    sample.for_each(n, [&](std::size_t, std::span<const double> x) {
      const auto ok = coherence_at(f, kHalf, x);
      std::copy(x.begin(), x.end(), xc.begin());  // extra inputs stay 0
      f.eval_into(x, fx);
      ext.eval_into(xc, ex);
      mod.eval_into(x, mx);
      for (std::size_t k = 0; k < ok.size(); ++k) {
        if (!ok[k]) continue;
        ++checked_points;
        disagreements += ex[k] != fx[k] || mx[k] != fx[k];
      }
    });
  }
  o.detail << " corpus=" << corpus.size() << " coherent_after_both=" << coherent_ok
           << " coherent_points_checked=" << checked_points << " disagreements=" << disagreements;
  o.require(corpus.size() >= 50 && coherent_ok == corpus.size(), "repaired outputs coherent");
  o.require(disagreements == 0, "agreement on originally coherent points");
}

void non_compositional(Outcome& o) {
  const auto spec = GammaSpec::output_modification(Expr::constant(1, {1.0}), kHalf);
  const auto r = demo_noncompositional(spec);
  const auto* w = std::get_if<NonCompositionalWitness>(&r);
  o.require(w != nullptr, "no witness");
  if (!w) return;
  const Point a{w->a};
  const double lhs = apply_gamma(compose(w->g, w->f), spec)(a)[0];
  const double rhs = compose(apply_gamma(w->g, spec), apply_gamma(w->f, spec))(a)[0];
  o.detail << " a=" << w->a << " Gamma(g.f)(a)=" << lhs << " (Gamma(g).Gamma(f))(a)=" << rhs;
  o.require(lhs == w->lhs && rhs == w->rhs, "reported values reproduce");
  o.require(lhs != rhs, "sides differ");
  o.require(!is_coherent_at(w->g, kHalf, a, 0), "a is an incoherence point of g");
  o.require(w->f(Point{0.0}) == a && w->f(Point{1.0}) == a, "f is the constant a");
  o.require(apply_gamma(w->g, spec)(a)[0] != w->g(a)[0], "Gamma(g)(a) differs from g(a)");
}

void quotient(Outcome& o) {
  const Expr f = Expr::tconorm(TConormKind::Lukasiewicz);
  const Expr swapped = compose(f, Expr::coord(2, {1, 0}));
  const auto sample = SamplingSpec::random(10000, 31337);
  std::size_t projected_mismatch = 0;
  double max_diff = 0.0;
  for (const auto& spec : {GammaSpec::output_modification(Expr::tconorm(TConormKind::Max), kHalf),
                           GammaSpec::domain_extension(kHalf)}) {
    const auto base = QuotientMorphism::of(f, spec);
    for (const Expr& rep : {swapped, base.canonical}) {
      const auto other = QuotientMorphism::of(rep, spec);
      const auto cmp = compare_extensionally(base.canonical, other.canonical, kHalf, sample);
      projected_mismatch += cmp.projected_mismatches;
      max_diff = std::max(max_diff, cmp.max_abs_diff);
    }
  }
  o.detail << " projected_mismatches=" << projected_mismatch << " max_raw_diff=" << max_diff;
  o.require(projected_mismatch == 0, "canonicals differ on projected values");
  o.require(max_diff <= kRawTolerance, "canonicals differ on raw values");

  // F_(delta,Gamma) = F_delta . F_Gamma on tables.
  std::size_t tables = 0, table_failures = 0;
  const auto corpus = testing::incoherent_corpus(40, 91);
  for (const auto& e : corpus) {
    const auto fallback = Expr::constant(e.in_arity(), std::vector<double>(e.out_arity(), 0.0));
    for (const auto& spec : {GammaSpec::output_modification(fallback, kHalf), GammaSpec::domain_extension(kHalf)}) {
      ++tables;
      const TruthTable lhs = explain(e, spec, false).to_table();
      const TruthTable rhs = booleanize(functor_gamma(QuotientMorphism::of(e, spec)), kHalf);
      table_failures += !(lhs == rhs);
    }
  }
  auto mod_spec = [](const Expr& e) {
    return GammaSpec::output_modification(Expr::constant(e.in_arity(), std::vector<double>(e.out_arity(), 0.0)),
                                          kHalf);
  };
  for (const auto& [a, b] : testing::coherent_pairs(150, 404, 3)) {
    ++tables;
    const auto fq = QuotientMorphism::of(a, mod_spec(a));
    const auto gq = QuotientMorphism::of(b, mod_spec(b));
    const TruthTable lhs = booleanize(functor_gamma(quotient_compose(gq, fq)), kHalf);
    const TruthTable rhs = bool_compose(booleanize(functor_gamma(gq), kHalf), booleanize(functor_gamma(fq), kHalf));
    table_failures += !(lhs == rhs);
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = 0; j < corpus.size(); ++j) {
      if (corpus[j].in_arity() != corpus[i].out_arity()) continue;
      ++tables;
      const auto fq = QuotientMorphism::of(corpus[i], mod_spec(corpus[i]));
      const auto gq = QuotientMorphism::of(corpus[j], mod_spec(corpus[j]));
      const TruthTable lhs = booleanize(functor_gamma(quotient_compose(gq, fq)), kHalf);
      const TruthTable rhs =
          bool_compose(booleanize(functor_gamma(gq), kHalf), booleanize(functor_gamma(fq), kHalf));
      table_failures += !(lhs == rhs);
    }
  }
  o.detail << " table_checks=" << tables << " table_failures=" << table_failures;
  o.require(table_failures == 0, "F_(delta,Gamma) = F_delta . F_Gamma");
}

void dnf(Outcome& o) {
  Rng rng(1000);
  std::size_t failures_plain = 0, failures_simple = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = rng.below(7);
    TruthTable t(n, 1);
    for (std::size_t r = 0; r < t.n_rows(); ++r) t.set(r, 0, rng.below(2));
    failures_plain += !(table_to_dnf(t, false).to_table() == t);
    failures_simple += !(table_to_dnf(t, true).to_table() == t);
  }
  TruthTable x(2, 1);
  x.set(1, 0, true);
  x.set(2, 0, true);
  const std::string rendered = table_to_dnf(x, true).render(0);
  o.detail << " failures(minterm)=" << failures_plain << " failures(minimized)=" << failures_simple << " xor=\""
           << rendered << "\"";
  o.require(failures_plain == 0 && failures_simple == 0, "round trip");
  o.require(rendered == "(x ∧ ¬y) ∨ (y ∧ ¬x)", "xor rendering");
}

void gradients(Outcome& o) {
  Rng rng(8);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t in = 2 + rng.below(2);
    auto m = MlpModel::initialize(in, {2 + rng.below(4)}, 1, 100 + trial);
    // Fresh biases are zero, which puts projected inputs on the PReLU kink.
    auto params = m.parameters();
    for (auto& v : params) v += rng.uniform(-0.3, 0.3);
    m.set_parameters(params);
    Batch b;
    for (int i = 0; i < 8; ++i) {
      Point x(in);
      for (auto& v : x) v = rng.uniform();
      b.inputs.push_back(x);
      b.targets.push_back({static_cast<double>(rng.below(2))});
    }
    TrainConfig cfg;
    cfg.coherence_lambda = trial % 2 ? 0.5 : 0.0;
    cfg.weight_decay = trial % 3 ? 0.01 : 0.0;
    worst = std::max(worst, gradient_check(m, b, cfg));
  }
  o.detail << " max_relative_error=" << worst;
  o.require(worst < kGradientTolerance, "gradient mismatch");
}

void experiment_xor(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = run_experiment(ExperimentConfig::defaults(Setting::Xor, 0));
  const double secs = seconds_since(t0);
  const auto& r = run.report;
  const std::string formula = r.naive.for_label(1).formula;
  o.detail << " test_accuracy=" << r.test.accuracy << " test_coherency=" << r.test.coherency << " class1=\""
           << formula << "\" time=" << secs << "s";
  o.require(r.test.accuracy >= kXorAccuracyFloor, "accuracy");
  o.require(r.test.coherency >= kXorCoherencyFloor, "coherency");
  o.require(formula == "(x ∧ ¬y) ∨ (y ∧ ¬x)", "formula");
  o.require(secs < kLimitExperimentSeconds, "runtime");
}

void experiment_fuzzy_or(Outcome& o) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = run_experiment(ExperimentConfig::defaults(Setting::FuzzyOr, seed));
    const double secs = seconds_since(t0);
    const auto& r = run.report;
    const double n1 = r.naive.for_label(1).fidelity, n0 = r.naive.for_label(0).fidelity;
    const double e1 = r.extended->for_label(1).fidelity, e0 = r.extended->for_label(0).fidelity;
    o.detail << " seed" << seed << "{fidelity1 " << n1 << "->" << e1 << ", fidelity0 " << n0 << "->" << e0
             << ", coherency train " << r.train.coherency << " test " << r.test.coherency << ", " << secs << "s}";
    o.require(e1 > n1 && e0 > n0, "extended fidelity must exceed naive, seed " + std::to_string(seed));
    o.require(r.test.coherency <= r.train.coherency - kCoherencyGap, "coherency gap, seed " + std::to_string(seed));
    o.require(secs < kLimitExperimentSeconds, "runtime, seed " + std::to_string(seed));
  }
}

}  // namespace

int main() {
  criterion(1, "coherence oracle agreement on the 201x201 grid", grid_oracle);
  criterion(2, "counterexamples reproduced exactly", counterexamples);
  criterion(3, "functor laws on the coherent corpus", functor_suite);
  criterion(4, "repair constructions are coherent and faithful", repair_theorems);
  criterion(5, "non-compositionality witness", non_compositional);
  criterion(6, "quotient well-definedness and functor factorization", quotient);
  criterion(7, "DNF round trip and XOR formula", dnf);
  criterion(8, "gradient check", gradients);
  criterion(9, "XOR experiment", experiment_xor);
  criterion(10, "fuzzy OR experiment, seeds 0-2", experiment_fuzzy_or);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
