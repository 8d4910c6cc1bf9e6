#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cohexp/truth_table.hpp"

namespace cohexp {

struct Literal {
  std::size_t var = 0;
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
};

/// A conjunction of literals; the empty term is TRUE.
using Term = std::vector<Literal>;

inline constexpr std::size_t kMaxMinimizeInputs = 12;

enum class Notation { Unicode, Ascii };

/// One disjunction of terms per output component. An output with no terms
/// is FALSE; an output whose only term is empty is TRUE.
///
/// Terms are kept in a canonical order: literals positive-first then by
/// variable, terms lexicographically by their literal sequence.
class DnfFormula {
 public:
  DnfFormula(std::size_t n_inputs, std::vector<std::vector<Term>> outputs,
             std::vector<std::string> names = {});

  std::size_t n_inputs() const { return n_inputs_; }
  std::size_t n_outputs() const { return outputs_.size(); }
  const std::vector<Term>& terms(std::size_t output) const { return outputs_.at(output); }
  std::size_t term_count(std::size_t output) const { return outputs_.at(output).size(); }
  std::size_t literal_count(std::size_t output) const;

  const std::vector<std::string>& names() const { return names_; }
  void set_names(std::vector<std::string> names);

  bool evaluate(std::size_t output, const BoolVector& v) const;
  BoolVector evaluate(const BoolVector& v) const;
  TruthTable to_table() const;

  std::string render(std::size_t output, Notation notation = Notation::Unicode) const;

 private:
  std::size_t n_inputs_;
  std::vector<std::vector<Term>> outputs_;
  std::vector<std::string> names_;
};

/// x, y, z, then x4, x5, ...
std::string default_variable_name(std::size_t index);

/// Without `simplify`, one minterm per true row. With `simplify`,
/// Quine-McCluskey prime implicants plus an exact minimum cover (fewest
/// terms, then fewest literals); limited to kMaxMinimizeInputs inputs.
DnfFormula table_to_dnf(const TruthTable& t, bool simplify);

}  // namespace cohexp
