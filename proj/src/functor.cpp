#include "cohexp/functor.hpp"

#include "cohexp/error.hpp"

namespace cohexp {

TruthTable booleanize(const Expr& f, const Projection& p) {
  if (!p.is_boolean()) throw DomainError("booleanize: projection image must be {0,1}");
  if (f.in_arity() > kMaxTableInputs) {
    throw CapacityError("booleanize: " + std::to_string(f.in_arity()) + " inputs exceeds the vertex enumeration limit");
  }
  TruthTable t(f.in_arity(), f.out_arity());
  Point x(f.in_arity()), y(f.out_arity());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const BoolVector v = t.input_vector(r);
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = v[i];
    f.eval_into(x, y);
    for (std::size_t k = 0; k < y.size(); ++k) t.set(r, k, p.apply(y[k]) == 1.0);
  }
  return t;
}

FunctorLawResult verify_functor_law(const Expr& f, const Expr& g, const Projection& p) {
  const Expr gf = compose(g, f);
  const TruthTable lhs = booleanize(gf, p);
  const TruthTable rhs = bool_compose(booleanize(g, p), booleanize(f, p));
  for (std::size_t r = 0; r < lhs.n_rows(); ++r) {
    if (lhs.row(r) != rhs.row(r)) return FunctorViolated{lhs.input_vector(r), lhs.row(r), rhs.row(r)};
  }
  return FunctorHolds{};
}

bool verify_identity_law(std::size_t arity, const Projection& p) {
  return booleanize(Expr::identity(arity), p) == TruthTable::identity(arity);
}

namespace counterexample {

Expr positive_indicator() {
  return Expr::piecewise(1, 1, {{{Condition{0, Condition::Op::LessEq, 0.0}}, Expr::constant(1, {0.0})}},
                         Expr::constant(1, {1.0}));
}

Expr low_high_step() {
  return Expr::piecewise(1, 1, {{{Condition{0, Condition::Op::Less, 0.5}}, Expr::constant(1, {0.2})}},
                         Expr::constant(1, {1.0}));
}

}  // namespace counterexample

}  // namespace cohexp
