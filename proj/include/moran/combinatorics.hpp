#pragma once

#include <cstdint>

#include "moran/rational.hpp"

namespace moran {

// binom(n, k); 0 outside 0 <= k <= n
bigint binomial(std::int64_t n, std::int64_t k);

// Stirling numbers of the second kind, S(l, j) = j S(l-1, j) + S(l-1, j-1).
// Guarded at l, j <= 64: callers never need more and the guard catches
// runaway arguments early.
bigint stirling2(std::int64_t l, std::int64_t j);

// falling factorial n(n-1)...(n-j+1); equals 0 when j > n >= 0
bigint falling(bigint n, std::int64_t j);

bigint ipow(bigint base, std::int64_t e);

// C^n_{mj} = sum_{l=j}^{m} binom(m,l) S(l,j) n^{m-l}: the number of m-tuples
// over an alphabet of n old and j new symbols that use every new symbol, with
// the new symbols' first occurrences in a fixed order.
bigint branching_coeff(std::int64_t n, std::int64_t m, std::int64_t j);

}  // namespace moran
