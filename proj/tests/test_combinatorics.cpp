#include <doctest.h>

#include "moran/combinatorics.hpp"

#include <cstdint>
#include <vector>

using namespace moran;

TEST_CASE("binomial matches the Pascal recurrence") {
  const std::int64_t top = 40;
  std::vector<std::vector<bigint>> pascal(top + 1);
  for (std::int64_t n = 0; n <= top; ++n) {
    pascal[n].assign(n + 1, 1);
    for (std::int64_t k = 1; k < n; ++k)
      pascal[n][k] = pascal[n - 1][k - 1] + pascal[n - 1][k];
    for (std::int64_t k = 0; k <= n; ++k) REQUIRE(binomial(n, k) == pascal[n][k]);
  }
  CHECK(binomial(40, 20) == bigint("137846528820"));
  CHECK(binomial(30, 15) == bigint("155117520"));
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(5, 6) == 0);
  CHECK(binomial(5, -1) == 0);
  CHECK(binomial(-1, 0) == 0);
}

namespace {

bigint factorial(std::int64_t n) {
  bigint r = 1;
  for (std::int64_t i = 2; i <= n; ++i) r *= i;
  return r;
}

// count surjections [l] -> [j] by exhaustive enumeration
bigint surjections(std::int64_t l, std::int64_t j) {
  std::vector<std::int64_t> f(l, 0);
  bigint count = 0;
  while (true) {
    std::vector<bool> hit(j, false);
    for (std::int64_t v : f) hit[static_cast<std::size_t>(v)] = true;
    bool all = true;
    for (bool h : hit) all = all && h;
    if (all) ++count;
    std::int64_t pos = 0;
    while (pos < l && f[pos] == j - 1) f[pos++] = 0;
    if (pos == l) break;
    ++f[pos];
  }
  return count;
}

// count m-tuples over n old and j new symbols where every new symbol occurs
// and the new symbols' first occurrences appear in canonical order
bigint tuples_using_new_in_order(std::int64_t n, std::int64_t m, std::int64_t j) {
  std::int64_t a = n + j;
  std::vector<std::int64_t> f(m, 0);
  bigint count = 0;
  while (true) {
    std::vector<std::int64_t> first(j, -1);
    for (std::int64_t pos = 0; pos < m; ++pos) {
      std::int64_t v = f[pos] - n;
      if (v >= 0 && first[static_cast<std::size_t>(v)] < 0)
        first[static_cast<std::size_t>(v)] = pos;
    }
    bool ok = true;
    for (std::int64_t v = 0; v < j; ++v) {
      if (first[static_cast<std::size_t>(v)] < 0) ok = false;
      if (v > 0 && first[static_cast<std::size_t>(v)] < first[static_cast<std::size_t>(v - 1)])
        ok = false;
    }
    if (ok) ++count;
    std::int64_t pos = 0;
    while (pos < m && f[pos] == a - 1) f[pos++] = 0;
    if (pos == m) break;
    ++f[pos];
  }
  return count;
}

}  // namespace

TEST_CASE("stirling2 counts set partitions") {
  for (std::int64_t l = 0; l <= 7; ++l)
    for (std::int64_t j = 0; j <= l; ++j) {
      bigint expected = j == 0 ? bigint(l == 0 ? 1 : 0) : surjections(l, j) / factorial(j);
      CHECK(stirling2(l, j) == expected);
    }
  CHECK(stirling2(3, 2) == 3);
  CHECK(stirling2(5, 3) == 25);
  CHECK(stirling2(7, 4) == 350);
  CHECK(stirling2(4, 9) == 0);
  CHECK_THROWS_AS(stirling2(65, 3), std::domain_error);
  CHECK_THROWS_AS(stirling2(-1, 0), std::domain_error);
}

TEST_CASE("falling factorial and integer power") {
  CHECK(falling(5, 2) == 20);
  CHECK(falling(5, 0) == 1);
  CHECK(falling(3, 5) == 0);
  CHECK(falling(0, 0) == 1);
  CHECK_THROWS_AS(falling(4, -1), std::domain_error);
  CHECK(ipow(2, 10) == 1024);
  CHECK(ipow(bigint(-2), 3) == -8);
  CHECK(ipow(5, 0) == 1);
  CHECK(ipow(0, 0) == 1);
  CHECK_THROWS_AS(ipow(2, -1), std::domain_error);
}

TEST_CASE("branching coefficients count tuples with ordered first occurrences") {
  for (std::int64_t n = 0; n <= 3; ++n)
    for (std::int64_t m = 1; m <= 5; ++m)
      for (std::int64_t j = 1; j <= m; ++j)
        CHECK(branching_coeff(n, m, j) == tuples_using_new_in_order(n, m, j));
  CHECK(branching_coeff(5, 2, 1) == 11);
  CHECK(branching_coeff(1, 3, 1) == 7);
  CHECK(branching_coeff(4, 6, 6) == 1);
  CHECK_THROWS_AS(branching_coeff(2, 3, 0), std::domain_error);
  CHECK_THROWS_AS(branching_coeff(2, 3, 4), std::domain_error);
  CHECK_THROWS_AS(branching_coeff(-1, 3, 1), std::domain_error);
}

TEST_CASE("tuple count over a widened alphabet splits by distinct new symbols") {
  for (std::int64_t N = 1; N <= 30; ++N)
    for (std::int64_t n = 0; n <= N; ++n)
      for (std::int64_t m = 1; m <= 6; ++m) {
        bigint lhs = 0;
        for (std::int64_t j = 1; j <= m; ++j)
          lhs += branching_coeff(n, m, j) * falling(bigint(N - n), j);
        REQUIRE(lhs == ipow(N, m) - ipow(n, m));
      }
}

TEST_CASE("partial sums of falling factorial ratios telescope") {
  for (std::int64_t N = 1; N <= 25; ++N)
    for (std::int64_t k = 1; k <= N; ++k)
      for (std::int64_t n = 1; n <= k; ++n) {
        bigrat lhs = 0;
        for (std::int64_t j = 1; j <= n - 1; ++j)
          lhs += bigrat(falling(bigint(k), j), falling(bigint(N), j));
        bigrat rhs = bigrat(k, N - k + 1) -
                     bigrat(N - n + 1, N - k + 1) *
                         bigrat(falling(bigint(k), n), falling(bigint(N), n));
        REQUIRE(lhs == rhs);
      }
}
