#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cohexp/projection.hpp"

namespace cohexp {

class MlpModel;
struct ExprNode;
struct PiecewiseRegion;

enum class TNormKind { Min, Product, Lukasiewicz };
enum class TConormKind { Max, ProbSum, Lukasiewicz };

double tnorm(TNormKind kind, double x, double y);
double tconorm(TConormKind kind, double x, double y);

/// Axis-aligned predicate on one input coordinate. Comparisons are exact.
struct Condition {
  enum class Op { Less, LessEq, Greater, GreaterEq };
  std::size_t input = 0;
  Op op = Op::Less;
  double value = 0.0;

  bool holds(std::span<const double> x) const;
};

/// A fuzzy function f: [0,1]^n -> [0,1]^m as an immutable expression tree.
///
/// Expressions share structure through reference counting and never change
/// after construction, so an Expr can be evaluated from many threads at once.
/// Arity consistency is checked by the builders; a constructed Expr is always
/// well formed.
class Expr {
 public:
  enum class Kind {
    Const,
    Coord,
    TNorm,
    TConorm,
    Affine,
    Mlp,
    Projection,
    Compose,
    Parallel,
    Fanout,
    Piecewise,
    DomainExtension,
    OutputModification,
  };

  static Expr constant(std::size_t in_arity, std::vector<double> values);
  static Expr coord(std::size_t in_arity, std::vector<std::size_t> indices);
  static Expr identity(std::size_t arity);
  static Expr tnorm(TNormKind kind);
  static Expr tconorm(TConormKind kind);
  /// Row-major `matrix` of shape out x in. Without `clamp`, evaluation
  /// raises DomainError when an output leaves [0,1].
  static Expr affine(std::vector<std::vector<double>> matrix, std::vector<double> bias,
                     bool clamp = true);
  static Expr mlp(std::shared_ptr<const MlpModel> model, std::string weights_ref = {});
  static Expr projection(const Projection& p, std::size_t arity);
  /// Product of morphisms: inputs are split between the parts in order.
  static Expr parallel(std::vector<Expr> parts);
  /// Pairing: every part reads the same input; outputs are concatenated.
  static Expr fanout(std::vector<Expr> parts);

  /// First region whose conditions all hold selects the branch.
  static Expr piecewise(std::size_t in_arity, std::size_t out_arity,
                        std::vector<PiecewiseRegion> regions,
                        Expr otherwise);

  // Nodes produced by the repair constructions in gamma.hpp.
  static Expr domain_extension(Expr base, const Projection& p,
                               std::vector<std::size_t> extended_components);
  static Expr output_modification(Expr base, Expr fallback, const Projection& p);

  std::size_t in_arity() const;
  std::size_t out_arity() const;
  Kind kind() const;
  const ExprNode& node() const { return *node_; }

  /// Checked evaluation: validates length and range of x.
  Point operator()(std::span<const double> x) const;
  Point operator()(std::initializer_list<double> x) const {
    return (*this)(std::span<const double>(x.begin(), x.size()));
  }
  /// Unchecked evaluation into `out` (size out_arity).
  void eval_into(std::span<const double> x, std::span<double> out) const;

  /// Same underlying node (not extensional equality).
  bool same_node(const Expr& other) const { return node_ == other.node_; }

  friend Expr compose(const Expr& g, const Expr& f);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ExprNode> node_;
};

struct PiecewiseRegion {
  std::vector<Condition> when;  // conjunction
  Expr then;
};

/// g . f; requires f.out_arity() == g.in_arity().
Expr compose(const Expr& g, const Expr& f);

/// Checked evaluation, equivalent to f(x).
Point eval(const Expr& f, std::span<const double> x);

struct ExprNode {
  struct Const {
    std::vector<double> values;
  };
  struct Coord {
    std::vector<std::size_t> indices;
  };
  struct TNorm {
    TNormKind kind;
  };
  struct TConorm {
    TConormKind kind;
  };
  struct Affine {
    std::vector<std::vector<double>> matrix;
    std::vector<double> bias;
    bool clamp;
  };
  struct Mlp {
    std::shared_ptr<const MlpModel> model;
    std::string weights_ref;
  };
  struct Lifted {
    Projection projection;
  };
  struct Compose {
    Expr outer;
    Expr inner;
  };
  struct Parallel {
    std::vector<Expr> parts;
  };
  struct Fanout {
    std::vector<Expr> parts;
  };
  struct Piecewise {
    std::vector<PiecewiseRegion> regions;
    Expr otherwise;
  };
  struct DomainExtension {
    Expr base;
    Projection projection;
    std::vector<std::size_t> extended;  // ascending output indices
  };
  struct OutputModification {
    Expr base;
    Expr fallback;
    Projection projection;
  };

  using Payload = std::variant<Const, Coord, TNorm, TConorm, Affine, Mlp, Lifted, Compose, Parallel,
                               Fanout, Piecewise, DomainExtension, OutputModification>;

  std::size_t in_arity;
  std::size_t out_arity;
  Payload payload;
};

std::string to_string(TNormKind k);
std::string to_string(TConormKind k);

}  // namespace cohexp
