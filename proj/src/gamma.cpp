#include "cohexp/gamma.hpp"

#include <sstream>

#include "cohexp/error.hpp"
#include "cohexp/functor.hpp"

namespace cohexp {

GammaSpec GammaSpec::domain_extension(const Projection& p, std::optional<SamplingSpec> s) {
  return GammaSpec{DomainExtension{}, p, std::move(s)};
}

GammaSpec GammaSpec::output_modification(Expr fallback, const Projection& p, std::optional<SamplingSpec> s) {
  return GammaSpec{OutputModification{std::move(fallback)}, p, std::move(s)};
}

SamplingSpec GammaSpec::sampling_for(std::size_t arity) const {
  return sampling ? *sampling : SamplingSpec::default_for(arity);
}

std::string GammaSpec::describe() const {
  std::ostringstream os;
  os << (is_extension() ? "domain-extension" : "output-modification") << " under " << projection.describe();
  return os.str();
}

Expr gamma_extend(const Expr& f, const GammaSpec& spec) {
  if (!spec.is_extension()) throw ContractError("gamma_extend: spec is not a domain extension");
  const auto report = check_coherence(f, spec.projection, spec.sampling_for(f.in_arity()), 0);
  auto bad = incoherent_components(report);
  if (bad.empty()) return f;
  return Expr::domain_extension(f, spec.projection, std::move(bad));
}

Expr gamma_output_mod(const Expr& f, const GammaSpec& spec) {
  const auto* mod = std::get_if<GammaSpec::OutputModification>(&spec.kind);
  if (!mod) throw ContractError("gamma_output_mod: spec is not an output modification");
  const Expr& g = mod->fallback;
  if (g.in_arity() != f.in_arity() || g.out_arity() != f.out_arity()) {
    std::ostringstream os;
    os << "gamma_output_mod: fallback is " << g.in_arity() << "->" << g.out_arity() << " but f is "
       << f.in_arity() << "->" << f.out_arity();
    throw StructuralError(os.str());
  }
  const auto sampling = spec.sampling_for(f.in_arity());
  const auto g_report = check_coherence(g, spec.projection, sampling, 1);
  if (!g_report.fully_coherent()) {
    throw ContractError("gamma_output_mod: fallback is not coherent under " + spec.projection.describe());
  }
  const auto f_report = check_coherence(f, spec.projection, sampling, 0);
  if (f_report.fully_coherent()) return f;
  return Expr::output_modification(f, g, spec.projection);
}

Expr apply_gamma(const Expr& f, const GammaSpec& spec) {
  return spec.is_extension() ? gamma_extend(f, spec) : gamma_output_mod(f, spec);
}

QuotientMorphism QuotientMorphism::of(const Expr& f, const GammaSpec& spec) {
  return QuotientMorphism{apply_gamma(f, spec), f, spec};
}

QuotientMorphism QuotientMorphism::identity(std::size_t arity, const GammaSpec& spec) {
  return QuotientMorphism{Expr::identity(arity), std::nullopt, spec};
}

QuotientMorphism quotient_compose(const QuotientMorphism& g, const QuotientMorphism& f) {
  if (f.out_arity() != g.in_arity()) {
    std::ostringstream os;
    os << "quotient_compose: [f] has " << f.out_arity() << " outputs, [g] expects " << g.in_arity();
    throw StructuralError(os.str());
  }
  if (g.gamma.kind.index() != f.gamma.kind.index() || !(g.gamma.projection == f.gamma.projection)) {
    throw ContractError("quotient_compose: classes come from different coherency maps");
  }
  // Composites of coherent functions are coherent, so Gamma fixes the
  // composite and it is already the canonical element of the class.
  Expr composite = compose(g.canonical, f.canonical);
  return QuotientMorphism{composite, std::nullopt, g.gamma};
}

Expr functor_gamma(const QuotientMorphism& f) { return f.canonical; }

DnfFormula explain(const Expr& f, const GammaSpec& spec, bool simplify, std::vector<std::string> names) {
  if (!spec.projection.is_boolean()) throw DomainError("explain: projection image must be {0,1}");
  const Expr repaired = apply_gamma(f, spec);
  DnfFormula dnf = table_to_dnf(booleanize(repaired, spec.projection), simplify);
  if (!names.empty()) dnf.set_names(std::move(names));
  return dnf;
}

NonCompositionalResult demo_noncompositional(const GammaSpec& spec, const Expr& g) {
  if (g.in_arity() != 1 || g.out_arity() != 1) {
    throw StructuralError("demo_noncompositional: g must be a unary function [0,1] -> [0,1]");
  }
  const auto sampling = spec.sampling_for(1);
  const auto report = check_coherence(g, spec.projection, sampling, 0);
  if (report.fully_coherent()) {
    return NotApplicable{"g is coherent on the sample; the construction needs a non-coherent g"};
  }
  const Expr gamma_g = apply_gamma(g, spec);
  if (gamma_g.in_arity() != 1) {
    // Gamma(g) . Gamma(f) is undefined while Gamma(g . f) exists for the
    // constant f = 0.
    return CompositionUndefined{gamma_g.in_arity(), 1};
  }
  std::optional<NonCompositionalResult> found;
  Point gx(1), ggx(1);
  const std::size_t count = sampling.sample_count(1);
  Point x(1);
  for (std::size_t i = 0; i < count && !found; ++i) {
    sampling.sample(1, i, x);
    if (is_coherent_at(g, spec.projection, x, 0)) continue;
    g.eval_into(x, gx);
    gamma_g.eval_into(x, ggx);
    if (ggx[0] == gx[0]) continue;
    const double a = x[0];
    const Expr f = Expr::constant(1, {a});
    const Expr lhs_expr = apply_gamma(compose(g, f), spec);
    const Expr rhs_expr = compose(gamma_g, apply_gamma(f, spec));
    found = NonCompositionalWitness{g, f, a, lhs_expr(x)[0], rhs_expr(x)[0], ggx[0]};
  }
  if (found) return *found;
  return NotApplicable{"no incoherent sample point where Gamma(g) differs from g"};
}

NonCompositionalResult demo_noncompositional(const GammaSpec& spec) {
  return demo_noncompositional(spec, counterexample::positive_indicator());
}

}  // namespace cohexp
