#include "cohexp/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cohexp/error.hpp"
#include "cohexp/random.hpp"

namespace cohexp {

namespace {

constexpr std::size_t kMaxSamples = std::size_t{1} << 26;

}  // namespace

SamplingSpec SamplingSpec::grid(std::size_t points_per_axis) {
  SamplingSpec s{Grid{points_per_axis}};
  s.validate();
  return s;
}

SamplingSpec SamplingSpec::random(std::size_t count, std::uint64_t seed) {
  SamplingSpec s{Random{count, seed}};
  s.validate();
  return s;
}

SamplingSpec SamplingSpec::default_for(std::size_t arity, std::uint64_t seed) {
  return arity <= 2 ? grid(101) : random(100000, seed);
}

void SamplingSpec::validate() const {
  if (auto g = std::get_if<Grid>(&mode)) {
    if (g->points_per_axis < 2) throw DomainError("grid sampling needs at least 2 points per axis");
  } else {
    if (std::get<Random>(mode).count < 1) throw DomainError("random sampling needs at least 1 point");
  }
}

std::size_t SamplingSpec::sample_count(std::size_t arity) const {
  if (auto g = std::get_if<Grid>(&mode)) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < arity; ++i) {
      if (total > kMaxSamples / g->points_per_axis) {
        throw CapacityError("grid sampling: too many points for this arity; use random sampling");
      }
      total *= g->points_per_axis;
    }
    return total;
  }
  return std::get<Random>(mode).count;
}

void SamplingSpec::sample(std::size_t arity, std::size_t index, std::span<double> out) const {
  if (auto g = std::get_if<Grid>(&mode)) {
    const std::size_t k = g->points_per_axis;
    const double step = static_cast<double>(k - 1);
    // Last axis varies fastest.
    for (std::size_t a = arity; a-- > 0;) {
      out[a] = static_cast<double>(index % k) / step;
      index /= k;
    }
    return;
  }
  const auto& r = std::get<Random>(mode);
  for (std::size_t a = 0; a < arity; ++a) {
    out[a] = counter_uniform(r.seed, static_cast<std::uint64_t>(index) * arity + a);
  }
}

void SamplingSpec::for_each(std::size_t arity,
                            const std::function<void(std::size_t, std::span<const double>)>& fn) const {
  const std::size_t n = sample_count(arity);
  Point x(arity);
  for (std::size_t i = 0; i < n; ++i) {
    sample(arity, i, x);
    fn(i, x);
  }
}

bool operator==(const SamplingSpec& a, const SamplingSpec& b) {
  if (a.mode.index() != b.mode.index()) return false;
  if (auto g = std::get_if<SamplingSpec::Grid>(&a.mode)) {
    return g->points_per_axis == std::get<SamplingSpec::Grid>(b.mode).points_per_axis;
  }
  const auto& x = std::get<SamplingSpec::Random>(a.mode);
  const auto& y = std::get<SamplingSpec::Random>(b.mode);
  return x.count == y.count && x.seed == y.seed;
}

std::vector<bool> coherence_at(const Expr& f, const Projection& p, std::span<const double> x) {
  const Point fx = f(x);
  const Point dx = p.apply(x);
  const Point fdx = f(dx);
  std::vector<bool> ok(fx.size());
  for (std::size_t i = 0; i < fx.size(); ++i) ok[i] = p.apply(fx[i]) == p.apply(fdx[i]);
  return ok;
}

bool is_coherent_at(const Expr& f, const Projection& p, std::span<const double> x, std::size_t component) {
  if (component >= f.out_arity()) throw StructuralError("is_coherent_at: component index out of range");
  return coherence_at(f, p, x)[component];
}

CoherenceReport check_coherence(const Expr& f, const Projection& p, const SamplingSpec& s,
                                std::size_t witness_limit) {
  s.validate();
  const std::size_t n = f.in_arity();
  const std::size_t m = f.out_arity();
  CoherenceReport report{std::vector<ComponentCoherence>(m), s, p, Verdict::CoherentOnSample};

  const bool reservoir = std::holds_alternative<SamplingSpec::Random>(s.mode);
  const std::uint64_t rseed = reservoir ? std::get<SamplingSpec::Random>(s.mode).seed : 0;
  // Bottom-k sampling by hashed sample index: a uniform subset of the
  // witnesses that does not depend on visiting order.
  std::vector<std::vector<std::pair<std::uint64_t, Witness>>> pools(m);

  Point fx(m), fdx(m), dx(n);
  s.for_each(n, [&](std::size_t idx, std::span<const double> x) {
    f.eval_into(x, fx);
    for (std::size_t a = 0; a < n; ++a) dx[a] = p.apply(x[a]);
    f.eval_into(dx, fdx);
    for (std::size_t i = 0; i < m; ++i) {
      auto& comp = report.per_component[i];
      ++comp.total;
      const double lhs = p.apply(fx[i]);
      const double rhs = p.apply(fdx[i]);
      if (lhs == rhs) {
        ++comp.coherent;
        continue;
      }
      if (witness_limit == 0) continue;
      Witness w{idx, Point(x.begin(), x.end()), fx[i], lhs, rhs};
      if (!reservoir) {
        if (comp.witnesses.size() < witness_limit) comp.witnesses.push_back(std::move(w));
        continue;
      }
      auto& pool = pools[i];
      const std::uint64_t key = splitmix64(rseed ^ splitmix64(idx * 0x9e3779b97f4a7c15ULL + i));
      auto cmp = [](const auto& a, const auto& b) { return a.first < b.first; };
      if (pool.size() < witness_limit) {
        pool.emplace_back(key, std::move(w));
        std::push_heap(pool.begin(), pool.end(), cmp);
      } else if (key < pool.front().first) {
        std::pop_heap(pool.begin(), pool.end(), cmp);
        pool.back() = {key, std::move(w)};
        std::push_heap(pool.begin(), pool.end(), cmp);
      }
    }
  });

  for (std::size_t i = 0; i < m; ++i) {
    auto& comp = report.per_component[i];
    if (reservoir) {
      for (auto& kw : pools[i]) comp.witnesses.push_back(std::move(kw.second));
      std::sort(comp.witnesses.begin(), comp.witnesses.end(),
                [](const Witness& a, const Witness& b) { return a.sample_index < b.sample_index; });
    }
    if (comp.coherent < comp.total) report.verdict = Verdict::IncoherentWithWitnesses;
  }
  return report;
}

std::vector<std::size_t> incoherent_components(const CoherenceReport& report) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < report.per_component.size(); ++i) {
    if (report.per_component[i].fraction() < 1.0) out.push_back(i);
  }
  return out;
}

Agreement compare_extensionally(const Expr& a, const Expr& b, const Projection& p, const SamplingSpec& s) {
  if (a.in_arity() != b.in_arity() || a.out_arity() != b.out_arity()) {
    throw StructuralError("compare_extensionally: arities differ");
  }
  Agreement out;
  Point ya(a.out_arity()), yb(b.out_arity());
  s.for_each(a.in_arity(), [&](std::size_t, std::span<const double> x) {
    a.eval_into(x, ya);
    b.eval_into(x, yb);
    ++out.samples;
    bool mismatch = false;
    for (std::size_t k = 0; k < ya.size(); ++k) {
      out.max_abs_diff = std::max(out.max_abs_diff, std::abs(ya[k] - yb[k]));
      if (p.apply(ya[k]) != p.apply(yb[k])) mismatch = true;
    }
    if (mismatch) ++out.projected_mismatches;
  });
  return out;
}

}  // namespace cohexp
