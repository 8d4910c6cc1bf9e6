#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cohexp/coherence.hpp"
#include "cohexp/dnf.hpp"
#include "cohexp/expr.hpp"

namespace cohexp {

/// Selects a coherency map Gamma: a repair that turns any fuzzy function
/// into a coherent one and leaves coherent functions unchanged.
///
/// Whether f is already coherent is decided on `sampling` (or on
/// SamplingSpec::default_for(arity) when unset), so both the idempotency
/// and the repair guarantees hold relative to that sample.
struct GammaSpec {
  struct DomainExtension {};
  struct OutputModification {
    Expr fallback;
  };
  std::variant<DomainExtension, OutputModification> kind;
  Projection projection = Projection::threshold(0.5);
  std::optional<SamplingSpec> sampling;

  static GammaSpec domain_extension(const Projection& p, std::optional<SamplingSpec> s = std::nullopt);
  static GammaSpec output_modification(Expr fallback, const Projection& p,
                                       std::optional<SamplingSpec> s = std::nullopt);

  bool is_extension() const { return std::holds_alternative<DomainExtension>(kind); }
  SamplingSpec sampling_for(std::size_t arity) const;
  std::string describe() const;
};

/// Adds one input c_j per incoherent output component i_j. The result is
/// coherent everywhere:
///   - delta(c_j) != 0: the component outputs c_j;
///   - otherwise it keeps f_i(x) where f_i is coherent at x and takes
///     f_i(delta(x)) where it is not.
/// With all extra inputs at 0 the result agrees with f on every point where
/// f is coherent. Returns f itself when no component is incoherent.
Expr gamma_extend(const Expr& f, const GammaSpec& spec);

/// Keeps f_i(x) where f_i is coherent at x; elsewhere takes the fallback
/// g_i(x) when delta(g_i(x)) matches delta(f_i(delta(x))), else
/// f_i(delta(x)). Throws ContractError when the fallback is not coherent on
/// the sample. Returns f itself when f is coherent on the sample.
Expr gamma_output_mod(const Expr& f, const GammaSpec& spec);

/// Dispatches on spec.kind.
Expr apply_gamma(const Expr& f, const GammaSpec& spec);

/// An equivalence class under f ~ g iff Gamma(f) == Gamma(g), held through
/// its unique coherent member.
struct QuotientMorphism {
  Expr canonical;
  std::optional<Expr> origin;
  GammaSpec gamma;

  static QuotientMorphism of(const Expr& f, const GammaSpec& spec);
  static QuotientMorphism identity(std::size_t arity, const GammaSpec& spec);

  std::size_t in_arity() const { return canonical.in_arity(); }
  std::size_t out_arity() const { return canonical.out_arity(); }
};

/// [g] . [f] = [Gamma(g) . Gamma(f)].
QuotientMorphism quotient_compose(const QuotientMorphism& g, const QuotientMorphism& f);

/// The functor from quotient classes to coherent functions: [f] -> Gamma(f).
Expr functor_gamma(const QuotientMorphism& f);

/// Gamma, then booleanization, then one DNF per output.
DnfFormula explain(const Expr& f, const GammaSpec& spec, bool simplify,
                   std::vector<std::string> names = {});

struct NonCompositionalWitness {
  Expr g;
  Expr f;  // the constant function at a
  double a = 0.0;
  double lhs = 0.0;  // Gamma(g . f)(a)
  double rhs = 0.0;  // (Gamma(g) . Gamma(f))(a)
  double gamma_g_at_a = 0.0;
};
struct CompositionUndefined {
  std::size_t gamma_g_in_arity = 0;
  std::size_t f_out_arity = 0;
};
struct NotApplicable {
  std::string reason;
};
using NonCompositionalResult = std::variant<NonCompositionalWitness, CompositionUndefined, NotApplicable>;

/// Builds f, g with Gamma(g . f) != Gamma(g) . Gamma(f) for a unary,
/// non-coherent g. Scans the sample for the first incoherent point a with
/// Gamma(g)(a) != g(a) and takes f to be the constant a. For domain
/// extension, Gamma(g) gains an input and the composite is undefined.
NonCompositionalResult demo_noncompositional(const GammaSpec& spec, const Expr& g);
/// Uses counterexample::positive_indicator() as g.
NonCompositionalResult demo_noncompositional(const GammaSpec& spec);

}  // namespace cohexp
