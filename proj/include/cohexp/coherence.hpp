#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "cohexp/expr.hpp"
#include "cohexp/projection.hpp"

namespace cohexp {

/// How the domain [0,1]^n is sampled when coherence is estimated.
///
/// Grid includes both endpoints on every axis. Random draws are counter
/// based, so sample i depends only on (seed, i) and reports are reproducible
/// bit for bit.
struct SamplingSpec {
  struct Grid {
    std::size_t points_per_axis;
  };
  struct Random {
    std::size_t count;
    std::uint64_t seed;
  };
  std::variant<Grid, Random> mode;

  static SamplingSpec grid(std::size_t points_per_axis);
  static SamplingSpec random(std::size_t count, std::uint64_t seed);
  /// Grid(101) for arity <= 2, Random(100000, seed) otherwise.
  static SamplingSpec default_for(std::size_t arity, std::uint64_t seed = 0);

  void validate() const;
  std::size_t sample_count(std::size_t arity) const;
  /// Writes sample `index` into `out` (size = arity).
  void sample(std::size_t arity, std::size_t index, std::span<double> out) const;
  void for_each(std::size_t arity, const std::function<void(std::size_t, std::span<const double>)>& fn) const;

  friend bool operator==(const SamplingSpec& a, const SamplingSpec& b);
};

struct Witness {
  std::size_t sample_index = 0;
  Point x;
  double value = 0.0;            // f_i(x)
  double projected = 0.0;        // delta(f_i(x))
  double projected_at_fixed = 0.0;  // delta(f_i(delta(x)))
};

struct ComponentCoherence {
  std::size_t coherent = 0;
  std::size_t total = 0;
  std::vector<Witness> witnesses;  // sorted by sample index, capped

  double fraction() const { return total == 0 ? 1.0 : static_cast<double>(coherent) / static_cast<double>(total); }
};

enum class Verdict { CoherentOnSample, IncoherentWithWitnesses };

/// Sampled estimate of the coherent set. A CoherentOnSample verdict is a
/// claim about the recorded sample only.
struct CoherenceReport {
  std::vector<ComponentCoherence> per_component;
  SamplingSpec sampling;
  Projection projection;
  Verdict verdict = Verdict::CoherentOnSample;

  bool fully_coherent() const { return verdict == Verdict::CoherentOnSample; }
};

inline constexpr std::size_t kDefaultWitnessLimit = 100;

/// delta(f_i(x)) == delta(f_i(delta(x))), compared exactly.
bool is_coherent_at(const Expr& f, const Projection& p, std::span<const double> x, std::size_t component);

/// Per-component coherence at x, sharing the two evaluations of f.
std::vector<bool> coherence_at(const Expr& f, const Projection& p, std::span<const double> x);

/// Estimates coherence of every output over the sample. Witnesses are the
/// first `witness_limit` incoherent samples for Grid, and a seeded uniform
/// subset of that size for Random; fractions always count every sample.
CoherenceReport check_coherence(const Expr& f, const Projection& p, const SamplingSpec& s,
                                std::size_t witness_limit = kDefaultWitnessLimit);

/// Output indices with coherent fraction < 1, ascending.
std::vector<std::size_t> incoherent_components(const CoherenceReport& report);

/// Sampled comparison of two expressions with equal arities.
struct Agreement {
  std::size_t samples = 0;
  std::size_t projected_mismatches = 0;  // samples where delta(a(x)) != delta(b(x))
  double max_abs_diff = 0.0;

  /// Raw values within `tol` everywhere and projected values identical.
  bool equal(double tol = 1e-12) const { return projected_mismatches == 0 && max_abs_diff <= tol; }
};

/// Extensional equality over a continuum is undecidable; this compares the
/// two functions on the sample only.
Agreement compare_extensionally(const Expr& a, const Expr& b, const Projection& p, const SamplingSpec& s);

}  // namespace cohexp
