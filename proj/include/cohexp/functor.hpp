#pragma once

#include <variant>

#include "cohexp/dnf.hpp"
#include "cohexp/expr.hpp"
#include "cohexp/truth_table.hpp"

namespace cohexp {

/// The Boolean function delta . f restricted to the vertices {0,1}^n.
/// Requires a projection with image {0,1} and at most kMaxTableInputs inputs.
TruthTable booleanize(const Expr& f, const Projection& p);

struct FunctorHolds {};
struct FunctorViolated {
  BoolVector vertex;
  BoolVector composite;  // (g . f)^delta at vertex
  BoolVector composed;   // g^delta . f^delta at vertex
};
using FunctorLawResult = std::variant<FunctorHolds, FunctorViolated>;

/// Compares booleanize(g . f) with bool_compose(booleanize(g), booleanize(f))
/// on every vertex and reports the first one where they differ.
FunctorLawResult verify_functor_law(const Expr& f, const Expr& g, const Projection& p);

/// booleanize(Expr::identity(n)) == TruthTable::identity(n).
bool verify_identity_law(std::size_t arity, const Projection& p);

/// Unary piecewise functions whose composite breaks compositionality under
/// threshold 0.5.
namespace counterexample {

/// 0 at x = 0, 1 for every x > 0.
Expr positive_indicator();
/// 0.2 for x < 0.5, 1 otherwise.
Expr low_high_step();

}  // namespace counterexample

}  // namespace cohexp
