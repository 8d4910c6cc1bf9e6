#include "cohexp/expr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cohexp/error.hpp"
#include "cohexp/nn.hpp"

namespace cohexp {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double tnorm(TNormKind kind, double x, double y) {
  switch (kind) {
    case TNormKind::Min:
      return std::min(x, y);
    case TNormKind::Product:
      return x * y;
    case TNormKind::Lukasiewicz:
      return std::max(0.0, x + y - 1.0);
  }
  return 0.0;
}

double tconorm(TConormKind kind, double x, double y) {
  switch (kind) {
    case TConormKind::Max:
      return std::max(x, y);
    case TConormKind::ProbSum:
      return x + y - x * y;
    case TConormKind::Lukasiewicz:
      return std::min(1.0, x + y);
  }
  return 0.0;
}

std::string to_string(TNormKind k) {
  switch (k) {
    case TNormKind::Min:
      return "min";
    case TNormKind::Product:
      return "product";
    case TNormKind::Lukasiewicz:
      return "lukasiewicz";
  }
  return "?";
}

std::string to_string(TConormKind k) {
  switch (k) {
    case TConormKind::Max:
      return "max";
    case TConormKind::ProbSum:
      return "prob_sum";
    case TConormKind::Lukasiewicz:
      return "lukasiewicz";
  }
  return "?";
}

bool Condition::holds(std::span<const double> x) const {
  const double v = x[input];
  switch (op) {
    case Op::Less:
      return v < value;
    case Op::LessEq:
      return v <= value;
    case Op::Greater:
      return !(v <= value);
    case Op::GreaterEq:
      return v >= value;
  }
  return false;
}

namespace {

std::shared_ptr<const ExprNode> make_node(std::size_t in, std::size_t out, ExprNode::Payload p) {
  if (out == 0) throw StructuralError("expression must have at least one output");
  return std::make_shared<const ExprNode>(ExprNode{in, out, std::move(p)});
}

std::string arity_msg(const char* what, std::size_t expected, std::size_t got) {
  std::ostringstream os;
  os << what << ": expected arity " << expected << ", got " << got;
  return os.str();
}

}  // namespace

Expr Expr::constant(std::size_t in_arity, std::vector<double> values) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("constant value outside [0,1]");
  }
  const std::size_t out = values.size();
  return Expr(make_node(in_arity, out, ExprNode::Const{std::move(values)}));
}

Expr Expr::coord(std::size_t in_arity, std::vector<std::size_t> indices) {
  for (auto i : indices) {
    if (i >= in_arity) throw StructuralError("coordinate index out of range");
  }
  const std::size_t out = indices.size();
  return Expr(make_node(in_arity, out, ExprNode::Coord{std::move(indices)}));
}

Expr Expr::identity(std::size_t arity) {
  std::vector<std::size_t> idx(arity);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return coord(arity, std::move(idx));
}

Expr Expr::tnorm(TNormKind kind) { return Expr(make_node(2, 1, ExprNode::TNorm{kind})); }

Expr Expr::tconorm(TConormKind kind) { return Expr(make_node(2, 1, ExprNode::TConorm{kind})); }

Expr Expr::affine(std::vector<std::vector<double>> matrix, std::vector<double> bias, bool clamp) {
  if (matrix.size() != bias.size()) throw StructuralError("affine: bias length != matrix rows");
  if (matrix.empty()) throw StructuralError("affine: empty matrix");
  const std::size_t in = matrix.front().size();
  for (const auto& row : matrix) {
    if (row.size() != in) throw StructuralError("affine: ragged matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw DomainError("affine: non-finite coefficient");
    }
  }
  for (double v : bias) {
    if (!std::isfinite(v)) throw DomainError("affine: non-finite bias");
  }
  const std::size_t out = matrix.size();
  return Expr(make_node(in, out, ExprNode::Affine{std::move(matrix), std::move(bias), clamp}));
}

Expr Expr::mlp(std::shared_ptr<const MlpModel> model, std::string weights_ref) {
  if (!model) throw StructuralError("mlp: null model");
  const std::size_t in = model->in_arity();
  const std::size_t out = model->out_arity();
  return Expr(make_node(in, out, ExprNode::Mlp{std::move(model), std::move(weights_ref)}));
}

Expr Expr::projection(const Projection& p, std::size_t arity) {
  return Expr(make_node(arity, arity, ExprNode::Lifted{p}));
}

Expr Expr::parallel(std::vector<Expr> parts) {
  if (parts.empty()) throw StructuralError("parallel: no parts");
  std::size_t in = 0, out = 0;
  for (const auto& p : parts) {
    in += p.in_arity();
    out += p.out_arity();
  }
  return Expr(make_node(in, out, ExprNode::Parallel{std::move(parts)}));
}

Expr Expr::fanout(std::vector<Expr> parts) {
  if (parts.empty()) throw StructuralError("fanout: no parts");
  const std::size_t in = parts.front().in_arity();
  std::size_t out = 0;
  for (const auto& p : parts) {
    if (p.in_arity() != in) throw StructuralError(arity_msg("fanout part", in, p.in_arity()));
    out += p.out_arity();
  }
  return Expr(make_node(in, out, ExprNode::Fanout{std::move(parts)}));
}

Expr Expr::piecewise(std::size_t in_arity, std::size_t out_arity, std::vector<PiecewiseRegion> regions,
                     Expr otherwise) {
  auto check = [&](const Expr& e) {
    if (e.in_arity() != in_arity) throw StructuralError(arity_msg("piecewise branch input", in_arity, e.in_arity()));
    if (e.out_arity() != out_arity) throw StructuralError(arity_msg("piecewise branch output", out_arity, e.out_arity()));
  };
  for (const auto& r : regions) {
    check(r.then);
    for (const auto& c : r.when) {
      if (c.input >= in_arity) throw StructuralError("piecewise: condition input out of range");
    }
  }
  check(otherwise);
  return Expr(make_node(in_arity, out_arity,
                        ExprNode::Piecewise{std::move(regions), std::move(otherwise)}));
}

Expr Expr::domain_extension(Expr base, const Projection& p, std::vector<std::size_t> extended) {
  std::sort(extended.begin(), extended.end());
  if (std::adjacent_find(extended.begin(), extended.end()) != extended.end()) {
    throw StructuralError("domain extension: duplicate component");
  }
  for (auto i : extended) {
    if (i >= base.out_arity()) throw StructuralError("domain extension: component out of range");
  }
  const std::size_t in = base.in_arity() + extended.size();
  const std::size_t out = base.out_arity();
  return Expr(make_node(in, out, ExprNode::DomainExtension{std::move(base), p, std::move(extended)}));
}

Expr Expr::output_modification(Expr base, Expr fallback, const Projection& p) {
  if (base.in_arity() != fallback.in_arity() || base.out_arity() != fallback.out_arity()) {
    throw StructuralError("output modification: fallback arities differ from base");
  }
  const std::size_t in = base.in_arity();
  const std::size_t out = base.out_arity();
  return Expr(make_node(in, out, ExprNode::OutputModification{std::move(base), std::move(fallback), p}));
}

std::size_t Expr::in_arity() const { return node_->in_arity; }
std::size_t Expr::out_arity() const { return node_->out_arity; }
Expr::Kind Expr::kind() const { return static_cast<Kind>(node_->payload.index()); }

Expr compose(const Expr& g, const Expr& f) {
  if (f.out_arity() != g.in_arity()) {
    throw StructuralError(arity_msg("compose", g.in_arity(), f.out_arity()));
  }
  return Expr(make_node(f.in_arity(), g.out_arity(), ExprNode::Compose{g, f}));
}

namespace {

void eval_rec(const Expr& e, std::span<const double> x, std::span<double> out);

void eval_node(const ExprNode& n, std::span<const double> x, std::span<double> out) {
  std::visit(
      Overloaded{
          [&](const ExprNode::Const& c) { std::copy(c.values.begin(), c.values.end(), out.begin()); },
          [&](const ExprNode::Coord& c) {
            for (std::size_t i = 0; i < c.indices.size(); ++i) out[i] = x[c.indices[i]];
          },
          [&](const ExprNode::TNorm& t) { out[0] = tnorm(t.kind, x[0], x[1]); },
          [&](const ExprNode::TConorm& t) { out[0] = tconorm(t.kind, x[0], x[1]); },
          [&](const ExprNode::Affine& a) {
            for (std::size_t r = 0; r < a.matrix.size(); ++r) {
              double v = a.bias[r];
              for (std::size_t k = 0; k < x.size(); ++k) v += a.matrix[r][k] * x[k];
              if (a.clamp) {
                v = clamp01(v);
              } else if (!(v >= 0.0 && v <= 1.0)) {
                throw DomainError("affine output outside [0,1] with clamping disabled");
              }
              out[r] = v;
            }
          },
          [&](const ExprNode::Mlp& m) { m.model->forward_into(x, out); },
          [&](const ExprNode::Lifted& l) {
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = l.projection.apply(x[i]);
          },
          [&](const ExprNode::Compose& c) {
            std::vector<double> mid(c.inner.out_arity());
            eval_rec(c.inner, x, mid);
            eval_rec(c.outer, mid, out);
          },
          [&](const ExprNode::Parallel& p) {
            std::size_t in_off = 0, out_off = 0;
            for (const auto& part : p.parts) {
              eval_rec(part, x.subspan(in_off, part.in_arity()), out.subspan(out_off, part.out_arity()));
              in_off += part.in_arity();
              out_off += part.out_arity();
            }
          },
          [&](const ExprNode::Fanout& p) {
            std::size_t out_off = 0;
            for (const auto& part : p.parts) {
              eval_rec(part, x, out.subspan(out_off, part.out_arity()));
              out_off += part.out_arity();
            }
          },
          [&](const ExprNode::Piecewise& p) {
            for (const auto& r : p.regions) {
              bool all = true;
              for (const auto& c : r.when) {
                if (!c.holds(x)) {
                  all = false;
                  break;
                }
              }
              if (all) {
                eval_rec(r.then, x, out);
                return;
              }
            }
            eval_rec(p.otherwise, x, out);
          },
          [&](const ExprNode::DomainExtension& d) {
            // Extra input c_j governs the j-th repaired component. A non-zero
            // projected c_j overrides the component; otherwise the base value
            // is kept where it is coherent and replaced by the value at the
            // projected point where it is not.
            const std::size_t n = d.base.in_arity();
            const auto base_x = x.first(n);
            const auto extra = x.subspan(n);
            std::vector<double> fx(d.base.out_arity()), fdx(d.base.out_arity());
            eval_rec(d.base, base_x, fx);
            const Point dx = d.projection.apply(base_x);
            eval_rec(d.base, dx, fdx);
            std::copy(fx.begin(), fx.end(), out.begin());
            for (std::size_t j = 0; j < d.extended.size(); ++j) {
              const std::size_t i = d.extended[j];
              const double c = extra[j];
              if (d.projection.apply(c) != 0.0) {
                out[i] = c;
              } else if (d.projection.apply(fx[i]) != d.projection.apply(fdx[i])) {
                out[i] = fdx[i];
              }
            }
          },
          [&](const ExprNode::OutputModification& m) {
            const std::size_t k = m.base.out_arity();
            std::vector<double> fx(k), fdx(k), gx(k);
            eval_rec(m.base, x, fx);
            const Point dx = m.projection.apply(x);
            eval_rec(m.base, dx, fdx);
            bool fallback_done = false;
            for (std::size_t i = 0; i < k; ++i) {
              const double target = m.projection.apply(fdx[i]);
              if (m.projection.apply(fx[i]) == target) {
                out[i] = fx[i];
                continue;
              }
              if (!fallback_done) {
                eval_rec(m.fallback, x, gx);
                fallback_done = true;
              }
              out[i] = m.projection.apply(gx[i]) == target ? gx[i] : fdx[i];
            }
          },
      },
      n.payload);
}

void eval_rec(const Expr& e, std::span<const double> x, std::span<double> out) {
  eval_node(e.node(), x, out);
}

}  // namespace

void Expr::eval_into(std::span<const double> x, std::span<double> out) const {
  eval_node(*node_, x, out);
}

Point Expr::operator()(std::span<const double> x) const {
  if (x.size() != in_arity()) {
    throw StructuralError(arity_msg("eval", in_arity(), x.size()));
  }
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("input component outside [0,1]");
  }
  Point out(out_arity());
  eval_node(*node_, x, out);
  return out;
}

Point eval(const Expr& f, std::span<const double> x) { return f(x); }

}  // namespace cohexp
