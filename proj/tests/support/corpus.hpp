#pragma once

// Random expression generators shared by the property and acceptance tests.

#include <cstdint>
#include <utility>
#include <vector>

#include "cohexp/expr.hpp"
#include "cohexp/random.hpp"

namespace cohexp::testing {

inline constexpr std::size_t kMaxCorpusArity = 4;

/// A random member of the closure of {Min, Max, constants, Coord, the lifted
/// threshold-0.5 projection} under Compose, Parallel and Fanout, with nesting
/// depth at most `depth` and every arity at most 4. All such expressions are
/// coherent under Threshold(0.5).
Expr coherent_expr(Rng& rng, std::size_t in_arity, int depth);

/// Composable pairs (f, g) with g.in_arity == f.out_arity.
std::vector<std::pair<Expr, Expr>> coherent_pairs(std::size_t count, std::uint64_t seed, int depth = 3);

/// Expressions with at least one component that is incoherent under
/// Threshold(0.5). Each component is either coherent or incoherent on at
/// least 0.5% of SamplingSpec::default_for(arity, seed). Arity 1 to 3.
std::vector<Expr> incoherent_corpus(std::size_t count, std::uint64_t seed);

}  // namespace cohexp::testing
