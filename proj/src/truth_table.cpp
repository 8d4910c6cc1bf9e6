#include "cohexp/truth_table.hpp"

#include <string>

#include "cohexp/error.hpp"

namespace cohexp {

TruthTable::TruthTable(std::size_t n_inputs, std::size_t n_outputs)
    : n_inputs_(n_inputs), n_outputs_(n_outputs) {
  if (n_inputs > kMaxTableInputs) {
    throw CapacityError("truth table: " + std::to_string(n_inputs) + " inputs exceeds the limit of " +
                        std::to_string(kMaxTableInputs));
  }
  if (n_outputs == 0) throw StructuralError("truth table: needs at least one output");
  bits_.assign(n_rows() * n_outputs, 0);
}

TruthTable TruthTable::identity(std::size_t n) {
  if (n == 0) throw StructuralError("identity table needs at least one input");
  return from_function(n, n, [](const BoolVector& v) { return v; });
}

TruthTable TruthTable::from_function(std::size_t n_inputs, std::size_t n_outputs,
                                     const std::function<BoolVector(const BoolVector&)>& fn) {
  TruthTable t(n_inputs, n_outputs);
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const BoolVector out = fn(t.input_vector(r));
    if (out.size() != n_outputs) throw StructuralError("truth table: function returned wrong arity");
    for (std::size_t k = 0; k < n_outputs; ++k) t.set(r, k, out[k] != 0);
  }
  return t;
}

BoolVector TruthTable::row(std::size_t r) const {
  return BoolVector(bits_.begin() + static_cast<std::ptrdiff_t>(r * n_outputs_),
                    bits_.begin() + static_cast<std::ptrdiff_t>((r + 1) * n_outputs_));
}

BoolVector TruthTable::input_vector(std::size_t r) const {
  BoolVector v(n_inputs_);
  for (std::size_t i = 0; i < n_inputs_; ++i) v[i] = static_cast<std::uint8_t>((r >> (n_inputs_ - 1 - i)) & 1U);
  return v;
}

std::size_t TruthTable::row_index(std::span<const std::uint8_t> inputs) const {
  if (inputs.size() != n_inputs_) throw StructuralError("truth table: input vector length mismatch");
  std::size_t r = 0;
  for (auto b : inputs) {
    if (b > 1) throw DomainError("truth table: input bit is not 0 or 1");
    r = (r << 1) | b;
  }
  return r;
}

TruthTable TruthTable::column(std::size_t output) const {
  if (output >= n_outputs_) throw StructuralError("truth table: output index out of range");
  TruthTable t(n_inputs_, 1);
  for (std::size_t r = 0; r < n_rows(); ++r) t.set(r, 0, get(r, output));
  return t;
}

TruthTable TruthTable::negated() const {
  TruthTable t = *this;
  for (auto& b : t.bits_) b ^= 1;
  return t;
}

TruthTable bool_compose(const TruthTable& g, const TruthTable& f) {
  if (f.n_outputs() != g.n_inputs()) {
    throw StructuralError("bool_compose: f has " + std::to_string(f.n_outputs()) + " outputs, g expects " +
                          std::to_string(g.n_inputs()));
  }
  TruthTable out(f.n_inputs(), g.n_outputs());
  for (std::size_t r = 0; r < out.n_rows(); ++r) {
    const std::size_t gr = g.row_index(f.row(r));
    for (std::size_t k = 0; k < g.n_outputs(); ++k) out.set(r, k, g.get(gr, k));
  }
  return out;
}

}  // namespace cohexp
