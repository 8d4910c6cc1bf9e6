#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cohexp {

using Point = std::vector<double>;

/// An idempotent map [0,1] -> S applied componentwise.
///
/// Threshold(alpha) is the alpha-booleanization: 1 iff x >= alpha, else 0.
/// Quantize(k) rounds to the nearest of k uniform levels {0, 1/(k-1), ..., 1};
/// exact midpoints round up, mirroring the closed rule of Threshold.
class Projection {
 public:
  struct Threshold {
    double alpha;
  };
  struct Identity {};
  struct Quantize {
    int levels;
  };
  using Kind = std::variant<Threshold, Identity, Quantize>;

  static Projection threshold(double alpha);
  static Projection identity();
  static Projection quantize(int levels);

  double apply(double x) const;
  Point apply(std::span<const double> x) const;

  /// True when the image of the projection is exactly {0,1}.
  bool is_boolean() const { return std::holds_alternative<Threshold>(kind_); }
  /// True when v is a fixed point, i.e. v lies in the image set.
  bool in_image(double v) const { return apply(v) == v; }

  const Kind& kind() const { return kind_; }
  std::string describe() const;

  friend bool operator==(const Projection& a, const Projection& b);

 private:
  explicit Projection(Kind k) : kind_(k) {}
  Kind kind_;
};

}  // namespace cohexp
