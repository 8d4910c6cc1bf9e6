#include "cohexp/projection.hpp"

#include <cmath>
#include <sstream>

#include "cohexp/error.hpp"

namespace cohexp {

Projection Projection::threshold(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("threshold alpha must lie in (0,1]");
  }
  return Projection(Threshold{alpha});
}

Projection Projection::identity() { return Projection(Identity{}); }

Projection Projection::quantize(int levels) {
  if (levels < 2) throw DomainError("quantize needs at least 2 levels");
  return Projection(Quantize{levels});
}

double Projection::apply(double x) const {
  struct Visitor {
    double x;
    double operator()(const Threshold& t) const { return x >= t.alpha ? 1.0 : 0.0; }
    double operator()(const Identity&) const { return x; }
    double operator()(const Quantize& q) const {
      const double steps = static_cast<double>(q.levels - 1);
      // Snap to an integer index first so every image point is the exact
      // double idx/steps and re-application lands on the same index.
      double idx = std::floor(x * steps + 0.5);
      if (idx < 0.0) idx = 0.0;
      if (idx > steps) idx = steps;
      return idx / steps;
    }
  };
  return std::visit(Visitor{x}, kind_);
}

Point Projection::apply(std::span<const double> x) const {
  Point out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = apply(x[i]);
  return out;
}

std::string Projection::describe() const {
  std::ostringstream os;
  if (auto t = std::get_if<Threshold>(&kind_)) {
    os << "threshold(" << t->alpha << ")";
  } else if (auto q = std::get_if<Quantize>(&kind_)) {
    os << "quantize(" << q->levels << ")";
  } else {
    os << "identity";
  }
  return os.str();
}

bool operator==(const Projection& a, const Projection& b) {
  if (a.kind_.index() != b.kind_.index()) return false;
  if (auto t = std::get_if<Projection::Threshold>(&a.kind_)) {
    return t->alpha == std::get<Projection::Threshold>(b.kind_).alpha;
  }
  if (auto q = std::get_if<Projection::Quantize>(&a.kind_)) {
    return q->levels == std::get<Projection::Quantize>(b.kind_).levels;
  }
  return true;
}

}  // namespace cohexp
