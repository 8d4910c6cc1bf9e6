#include "cohexp/dnf.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <unordered_set>

#include "cohexp/error.hpp"

namespace cohexp {

namespace {

bool literal_less(const Literal& a, const Literal& b) {
  if (a.negated != b.negated) return !a.negated;
  return a.var < b.var;
}

bool term_less(const Term& a, const Term& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), literal_less);
}

// An implicant over n variables: `mask` marks eliminated positions, `value`
// holds the fixed bits. Bit positions follow row indices (input 0 is bit n-1).
struct Implicant {
  std::uint32_t value;
  std::uint32_t mask;

  bool covers(std::uint32_t minterm) const { return (minterm & ~mask) == value; }
  int literals(std::size_t n) const { return static_cast<int>(n) - std::popcount(mask); }
};

Term to_term(const Implicant& imp, std::size_t n) {
  Term t;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bit = 1U << (n - 1 - i);
    if (imp.mask & bit) continue;
    t.push_back(Literal{i, (imp.value & bit) == 0});
  }
  return t;
}

std::vector<Implicant> prime_implicants(const std::vector<std::uint32_t>& minterms, std::size_t n) {
  auto key = [](const Implicant& i) { return (static_cast<std::uint64_t>(i.mask) << 32) | i.value; };
  std::vector<Implicant> current;
  for (auto m : minterms) current.push_back({m, 0});
  std::vector<Implicant> primes;
  while (!current.empty()) {
    std::unordered_set<std::uint64_t> present;
    for (const auto& i : current) present.insert(key(i));
    std::unordered_set<std::uint64_t> used;
    std::unordered_set<std::uint64_t> next_keys;
    std::vector<Implicant> next;
    for (const auto& imp : current) {
      for (std::size_t b = 0; b < n; ++b) {
        const std::uint32_t bit = 1U << b;
        if ((imp.mask & bit) || (imp.value & bit)) continue;
        const Implicant partner{imp.value | bit, imp.mask};
        if (!present.count(key(partner))) continue;
        used.insert(key(imp));
        used.insert(key(partner));
        const Implicant merged{imp.value, imp.mask | bit};
        if (next_keys.insert(key(merged)).second) next.push_back(merged);
      }
    }
    for (const auto& imp : current) {
      if (!used.count(key(imp))) primes.push_back(imp);
    }
    current = std::move(next);
  }
  return primes;
}

// Exact minimum cover of `minterms` by `primes`: fewest terms, then fewest
// literals. Essential implicants are fixed first; the cyclic remainder is
// solved by branch and bound, branching on the least-covered minterm.
class CoverSolver {
 public:
  CoverSolver(const std::vector<Implicant>& primes, const std::vector<std::uint32_t>& minterms, std::size_t n)
      : primes_(primes), n_(n) {
    covering_.resize(minterms.size());
    for (std::size_t m = 0; m < minterms.size(); ++m) {
      for (std::size_t p = 0; p < primes.size(); ++p) {
        if (primes[p].covers(minterms[m])) covering_[m].push_back(p);
      }
    }
    covers_.resize(primes.size());
    for (std::size_t m = 0; m < minterms.size(); ++m) {
      for (auto p : covering_[m]) covers_[p].push_back(m);
    }
  }

  std::vector<std::size_t> solve() {
    std::vector<int> hit(covering_.size(), 0);
    std::vector<std::size_t> chosen;
    for (std::size_t m = 0; m < covering_.size(); ++m) {
      if (covering_[m].size() == 1) {
        const auto p = covering_[m].front();
        if (std::find(chosen.begin(), chosen.end(), p) == chosen.end()) {
          chosen.push_back(p);
          for (auto mm : covers_[p]) ++hit[mm];
        }
      }
    }
    best_terms_ = SIZE_MAX;
    best_literals_ = INT32_MAX;
    int literals = 0;
    for (auto p : chosen) literals += primes_[p].literals(n_);
    search(hit, chosen, literals);
    return best_;
  }

 private:
  void search(std::vector<int>& hit, std::vector<std::size_t>& chosen, int literals) {
    std::size_t pick = SIZE_MAX;
    for (std::size_t m = 0; m < hit.size(); ++m) {
      if (hit[m] == 0 && (pick == SIZE_MAX || covering_[m].size() < covering_[pick].size())) pick = m;
    }
    if (pick == SIZE_MAX) {
      if (chosen.size() < best_terms_ || (chosen.size() == best_terms_ && literals < best_literals_)) {
        best_ = chosen;
        best_terms_ = chosen.size();
        best_literals_ = literals;
      }
      return;
    }
    if (chosen.size() + 1 > best_terms_) return;
    if (chosen.size() + 1 == best_terms_ && literals >= best_literals_) return;

    std::vector<std::size_t> options = covering_[pick];
    std::sort(options.begin(), options.end(), [&](std::size_t a, std::size_t b) {
      if (covers_[a].size() != covers_[b].size()) return covers_[a].size() > covers_[b].size();
      return primes_[a].literals(n_) < primes_[b].literals(n_);
    });
    for (auto p : options) {
      chosen.push_back(p);
      for (auto m : covers_[p]) ++hit[m];
      search(hit, chosen, literals + primes_[p].literals(n_));
      for (auto m : covers_[p]) --hit[m];
      chosen.pop_back();
    }
  }

  const std::vector<Implicant>& primes_;
  std::size_t n_;
  std::vector<std::vector<std::size_t>> covering_;  // minterm -> primes
  std::vector<std::vector<std::size_t>> covers_;    // prime -> minterms
  std::vector<std::size_t> best_;
  std::size_t best_terms_ = SIZE_MAX;
  int best_literals_ = INT32_MAX;
};

std::vector<Term> minimize(const std::vector<std::uint32_t>& minterms, std::size_t n) {
  if (minterms.empty()) return {};
  if (minterms.size() == (std::size_t{1} << n)) return {Term{}};
  const auto primes = prime_implicants(minterms, n);
  CoverSolver solver(primes, minterms, n);
  std::vector<Term> terms;
  for (auto p : solver.solve()) terms.push_back(to_term(primes[p], n));
  return terms;
}

}  // namespace

std::string default_variable_name(std::size_t index) {
  static const char* first[] = {"x", "y", "z"};
  if (index < 3) return first[index];
  return "x" + std::to_string(index + 1);
}

DnfFormula::DnfFormula(std::size_t n_inputs, std::vector<std::vector<Term>> outputs,
                       std::vector<std::string> names)
    : n_inputs_(n_inputs), outputs_(std::move(outputs)) {
  for (auto& terms : outputs_) {
    for (auto& t : terms) {
      std::sort(t.begin(), t.end(), literal_less);
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].var >= n_inputs_) throw StructuralError("dnf: literal variable out of range");
        for (std::size_t j = 0; j < i; ++j) {
          if (t[j].var == t[i].var) throw StructuralError("dnf: variable repeated within a term");
        }
      }
    }
    std::sort(terms.begin(), terms.end(), term_less);
  }
  set_names(std::move(names));
}

void DnfFormula::set_names(std::vector<std::string> names) {
  if (names.empty()) {
    for (std::size_t i = 0; i < n_inputs_; ++i) names.push_back(default_variable_name(i));
  }
  if (names.size() != n_inputs_) throw StructuralError("dnf: variable name count mismatch");
  names_ = std::move(names);
}

std::size_t DnfFormula::literal_count(std::size_t output) const {
  std::size_t n = 0;
  for (const auto& t : outputs_.at(output)) n += t.size();
  return n;
}

bool DnfFormula::evaluate(std::size_t output, const BoolVector& v) const {
  if (v.size() != n_inputs_) throw StructuralError("dnf: assignment length mismatch");
  for (const auto& t : outputs_.at(output)) {
    bool sat = true;
    for (const auto& l : t) {
      if ((v[l.var] != 0) == l.negated) {
        sat = false;
        break;
      }
    }
    if (sat) return true;
  }
  return false;
}

BoolVector DnfFormula::evaluate(const BoolVector& v) const {
  BoolVector out(outputs_.size());
  for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = evaluate(k, v) ? 1 : 0;
  return out;
}

TruthTable DnfFormula::to_table() const {
  return TruthTable::from_function(n_inputs_, outputs_.size(), [&](const BoolVector& v) { return evaluate(v); });
}

std::string DnfFormula::render(std::size_t output, Notation notation) const {
  const bool ascii = notation == Notation::Ascii;
  const char* and_op = ascii ? " & " : " ∧ ";
  const char* or_op = ascii ? " | " : " ∨ ";
  const char* not_op = ascii ? "!" : "¬";
  const auto& terms = outputs_.at(output);
  if (terms.empty()) return ascii ? "false" : "FALSE";
  for (const auto& t : terms) {
    if (t.empty()) return ascii ? "true" : "TRUE";
  }
  std::string s;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) s += or_op;
    const auto& t = terms[i];
    const bool parens = terms.size() > 1 && t.size() > 1;
    if (parens) s += "(";
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (j > 0) s += and_op;
      if (t[j].negated) s += not_op;
      s += names_[t[j].var];
    }
    if (parens) s += ")";
  }
  return s;
}

DnfFormula table_to_dnf(const TruthTable& t, bool simplify) {
  const std::size_t n = t.n_inputs();
  if (simplify && n > kMaxMinimizeInputs) {
    throw CapacityError("table_to_dnf: minimization is limited to " + std::to_string(kMaxMinimizeInputs) +
                        " inputs");
  }
  std::vector<std::vector<Term>> outputs;
  for (std::size_t k = 0; k < t.n_outputs(); ++k) {
    std::vector<std::uint32_t> minterms;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      if (t.get(r, k)) minterms.push_back(static_cast<std::uint32_t>(r));
    }
    if (simplify) {
      outputs.push_back(minimize(minterms, n));
    } else {
      std::vector<Term> terms;
      for (auto m : minterms) terms.push_back(to_term(Implicant{m, 0}, n));
      outputs.push_back(std::move(terms));
    }
  }
  return DnfFormula(n, std::move(outputs));
}

}  // namespace cohexp
