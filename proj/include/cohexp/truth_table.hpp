#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cohexp {

using BoolVector = std::vector<std::uint8_t>;

inline constexpr std::size_t kMaxTableInputs = 20;

/// A Boolean function {0,1}^n -> {0,1}^m stored as 2^n rows.
///
/// Rows are ordered lexicographically with input 0 as the most significant
/// bit, so row r assigns input i the bit (r >> (n - 1 - i)) & 1.
class TruthTable {
 public:
  TruthTable(std::size_t n_inputs, std::size_t n_outputs);

  static TruthTable identity(std::size_t n);
  static TruthTable from_function(std::size_t n_inputs, std::size_t n_outputs,
                                  const std::function<BoolVector(const BoolVector&)>& fn);

  std::size_t n_inputs() const { return n_inputs_; }
  std::size_t n_outputs() const { return n_outputs_; }
  std::size_t n_rows() const { return std::size_t{1} << n_inputs_; }

  bool get(std::size_t row, std::size_t output) const { return bits_[row * n_outputs_ + output] != 0; }
  void set(std::size_t row, std::size_t output, bool v) { bits_[row * n_outputs_ + output] = v ? 1 : 0; }

  BoolVector row(std::size_t r) const;
  BoolVector input_vector(std::size_t r) const;
  std::size_t row_index(std::span<const std::uint8_t> inputs) const;
  BoolVector lookup(std::span<const std::uint8_t> inputs) const { return row(row_index(inputs)); }

  TruthTable column(std::size_t output) const;
  TruthTable negated() const;

  friend bool operator==(const TruthTable&, const TruthTable&) = default;

 private:
  std::size_t n_inputs_;
  std::size_t n_outputs_;
  std::vector<std::uint8_t> bits_;
};

/// Composition in the category of Boolean functions: row(v) = g(f(v)).
TruthTable bool_compose(const TruthTable& g, const TruthTable& f);

}  // namespace cohexp
