#include "moran/combinatorics.hpp"

#include <map>
#include <stdexcept>
#include <utility>

namespace moran {

bigint binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  bigint r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= (n - k + i);
    r /= i;  // exact: r is binom(n-k+i, i) after this step
  }
  return r;
}

bigint stirling2(std::int64_t l, std::int64_t j) {
  if (l < 0 || j < 0) throw std::domain_error("stirling2: negative argument");
  if (l > 64 || j > 64) throw std::domain_error("stirling2: argument above guard (64)");
  if (j > l) return 0;
  if (l == 0) return 1;  // S(0,0) = 1; j > l handled above
  if (j == 0) return 0;
  // small table, rebuilt per call; callers cache at matrix-assembly level
  std::vector<bigint> row(static_cast<std::size_t>(j) + 1, 0);
  row[0] = 1;  // S(0,0)
  for (std::int64_t ll = 1; ll <= l; ++ll) {
    for (std::int64_t jj = std::min<std::int64_t>(j, ll); jj >= 1; --jj) {
      row[static_cast<std::size_t>(jj)] =
          bigint(jj) * row[static_cast<std::size_t>(jj)] + row[static_cast<std::size_t>(jj - 1)];
    }
    row[0] = 0;  // S(ll, 0) = 0 for ll >= 1
  }
  return row[static_cast<std::size_t>(j)];
}

bigint falling(bigint n, std::int64_t j) {
  if (j < 0) throw std::domain_error("falling: negative exponent");
  bigint r = 1;
  for (std::int64_t i = 0; i < j; ++i) r *= (n - i);
  return r;
}

bigint ipow(bigint base, std::int64_t e) {
  if (e < 0) throw std::domain_error("ipow: negative exponent");
  bigint r = 1;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

bigint branching_coeff(std::int64_t n, std::int64_t m, std::int64_t j) {
  if (j < 1 || j > m) throw std::domain_error("branching_coeff: need 1 <= j <= m");
  if (n < 0) throw std::domain_error("branching_coeff: negative n");
  bigint c = 0;
  for (std::int64_t l = j; l <= m; ++l) {
    c += binomial(m, l) * stirling2(l, j) * ipow(n, m - l);
  }
  return c;
}

}  // namespace moran
