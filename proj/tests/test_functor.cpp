#include "doctest.h"

#include "cohexp/dnf.hpp"
#include "cohexp/error.hpp"
#include "cohexp/functor.hpp"
#include "cohexp/random.hpp"
#include "cohexp/serialize.hpp"
#include "support/corpus.hpp"

using namespace cohexp;

namespace {

const Projection kHalf = Projection::threshold(0.5);

TruthTable table1(std::size_t n, std::initializer_list<int> rows) {
  TruthTable t(n, 1);
  std::size_t r = 0;
  for (int v : rows) t.set(r++, 0, v != 0);
  return t;
}

TruthTable random_table(Rng& rng, std::size_t n, std::size_t m) {
  TruthTable t(n, m);
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    for (std::size_t k = 0; k < m; ++k) t.set(r, k, rng.below(2));
  }
  return t;
}

}  // namespace

TEST_CASE("booleanize examples") {
  CHECK(booleanize(Expr::tconorm(TConormKind::Lukasiewicz), kHalf) == table1(2, {0, 1, 1, 1}));
  CHECK(booleanize(Expr::projection(kHalf, 1), kHalf) == TruthTable::identity(1));
  CHECK(booleanize(Expr::constant(2, {0.7}), kHalf) == table1(2, {1, 1, 1, 1}));
  CHECK_THROWS_AS(booleanize(Expr::tnorm(TNormKind::Min), Projection::identity()), DomainError);
  CHECK_THROWS_AS(booleanize(Expr::constant(21, {0.0}), kHalf), CapacityError);
}

TEST_CASE("truth table layout") {
  TruthTable t(3, 1);
  CHECK(t.input_vector(1) == BoolVector{0, 0, 1});
  CHECK(t.input_vector(4) == BoolVector{1, 0, 0});
  CHECK(t.row_index(BoolVector{1, 1, 0}) == 6);
  CHECK_THROWS_AS(TruthTable(21, 1), CapacityError);
  const auto tt = table1(2, {0, 1, 1, 0});
  CHECK(table_from_json(Json::parse(table_to_json(tt).dump())) == tt);
}

TEST_CASE("DNF rendering") {
  const auto xor_dnf = table_to_dnf(table1(2, {0, 1, 1, 0}), true);
  CHECK(xor_dnf.render(0) == "(x ∧ ¬y) ∨ (y ∧ ¬x)");
  CHECK(xor_dnf.render(0, Notation::Ascii) == "(x & !y) | (y & !x)");
  CHECK(table_to_dnf(table1(2, {0, 1, 1, 1}), true).render(0) == "x ∨ y");
  CHECK(table_to_dnf(table1(2, {0, 0, 0, 1}), true).render(0) == "x ∧ y");
  CHECK(table_to_dnf(table1(2, {0, 0, 0, 0}), true).render(0) == "FALSE");
  CHECK(table_to_dnf(table1(2, {0, 0, 0, 0}), true).term_count(0) == 0);
  CHECK(table_to_dnf(table1(2, {1, 1, 1, 1}), true).render(0) == "TRUE");
  CHECK(table_to_dnf(table1(2, {1, 1, 1, 1}), true).render(0, Notation::Ascii) == "true");
  CHECK(table_to_dnf(table1(2, {0, 1, 1, 1}), false).render(0) == "(x ∧ y) ∨ (x ∧ ¬y) ∨ (y ∧ ¬x)");
  CHECK(default_variable_name(2) == "z");
  CHECK(default_variable_name(3) == "x4");
  auto named = table_to_dnf(table1(1, {1, 0}), true);
  named.set_names({"nc"});
  CHECK(named.render(0) == "¬nc");
  CHECK_THROWS_AS(named.set_names({"a", "b"}), StructuralError);
}

TEST_CASE("DNF term validation") {
  CHECK_THROWS_AS(DnfFormula(2, {{Term{{0, false}, {0, true}}}}), StructuralError);
  CHECK_THROWS_AS(DnfFormula(2, {{Term{{2, false}}}}), StructuralError);
}

TEST_CASE("DNF round-trips random tables in both modes") {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = rng.below(7);
    const TruthTable t = random_table(rng, n, 1 + rng.below(2));
    const auto plain = table_to_dnf(t, false);
    const auto simple = table_to_dnf(t, true);
    REQUIRE(plain.to_table() == t);
    REQUIRE(simple.to_table() == t);
    for (std::size_t k = 0; k < t.n_outputs(); ++k) REQUIRE(simple.term_count(k) <= plain.term_count(k));
  }
}

TEST_CASE("minimization is exact on small cases") {
  // Majority of three needs three two-literal terms.
  const auto maj = table_to_dnf(table1(3, {0, 0, 0, 1, 0, 1, 1, 1}), true);
  CHECK(maj.term_count(0) == 3);
  CHECK(maj.literal_count(0) == 6);
  // The cyclic function on three inputs has two minimum covers of three terms.
  const auto cyc = table_to_dnf(table1(3, {0, 1, 1, 1, 1, 1, 1, 0}), true);
  CHECK(cyc.term_count(0) == 3);
  CHECK_THROWS_AS(table_to_dnf(TruthTable(13, 1), true), CapacityError);
  CHECK(table_to_dnf(TruthTable(13, 1), false).term_count(0) == 0);
}

TEST_CASE("Boolean composition") {
  const auto t = table1(2, {0, 1, 1, 0});
  CHECK(bool_compose(TruthTable::identity(1), t) == t);
  const auto not1 = table1(1, {1, 0});
  CHECK(bool_compose(not1, not1) == TruthTable::identity(1));
  TruthTable not2(2, 2);
  for (std::size_t r = 0; r < 4; ++r) {
    const auto v = not2.input_vector(r);
    not2.set(r, 0, !v[0]);
    not2.set(r, 1, !v[1]);
  }
  CHECK(bool_compose(table1(2, {0, 0, 0, 1}), not2) == table1(2, {1, 0, 0, 0}));
  CHECK_THROWS_AS(bool_compose(t, not1), StructuralError);
}

TEST_CASE("functor law on examples") {
  const auto pipe = Expr::fanout({Expr::tnorm(TNormKind::Min), Expr::tconorm(TConormKind::Max)});
  CHECK(std::holds_alternative<FunctorHolds>(verify_functor_law(pipe, Expr::tnorm(TNormKind::Min), kHalf)));
  CHECK(std::holds_alternative<FunctorHolds>(verify_functor_law(pipe, Expr::identity(2), kHalf)));
  CHECK(std::holds_alternative<FunctorHolds>(
      verify_functor_law(Expr::identity(2), Expr::tnorm(TNormKind::Min), kHalf)));

  const auto r = verify_functor_law(counterexample::low_high_step(), counterexample::positive_indicator(), kHalf);
  REQUIRE(std::holds_alternative<FunctorViolated>(r));
  const auto& v = std::get<FunctorViolated>(r);
  CHECK(v.vertex == BoolVector{0});
  CHECK(v.composite == BoolVector{1});
  CHECK(v.composed == BoolVector{0});
  CHECK_THROWS_AS(verify_functor_law(Expr::tnorm(TNormKind::Min), Expr::tnorm(TNormKind::Min), kHalf),
                  StructuralError);
}

TEST_CASE("identity law for all arities up to 8") {
  for (std::size_t n = 1; n <= 8; ++n) {
    CHECK(verify_identity_law(n, kHalf));
    CHECK(booleanize(Expr::projection(kHalf, n), kHalf) == TruthTable::identity(n));
  }
}

TEST_CASE("functor law holds on the coherent corpus") {
  for (const auto& [f, g] : testing::coherent_pairs(300, 5, 3)) {
    REQUIRE(std::holds_alternative<FunctorHolds>(verify_functor_law(f, g, kHalf)));
  }
}
