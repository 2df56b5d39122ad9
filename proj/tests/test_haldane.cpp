#include <doctest.h>

#include "moran/haldane.hpp"

#include <cmath>
#include <vector>

#include "moran/ctmc.hpp"
#include "moran/generators.hpp"

using namespace moran;

TEST_CASE("the three fixation-probability evaluations agree") {
  for (std::int64_t N : {10, 100, 1000}) {
    for (std::int64_t m : {1, 2, 3}) {
      for (double alpha : {0.0, 0.5}) {
        double a = fixation_prob_exact(N, 1.0, m, alpha);
        double b = fixation_prob_logsum(N, 1.0, m, alpha);
        double c = fixation_prob_naive(N, 1.0, m, alpha);
        CHECK(a > 0.0);
        CHECK(a < 1.0);
        CHECK(std::fabs(a - b) <= 1e-12 * a);
        CHECK(std::fabs(a - c) <= 1e-12 * a);
      }
    }
  }
}

TEST_CASE("order-1 selection has a two-point closed form") {
  const std::int64_t N = 37;
  const double sigma = 0.9, alpha = 0.3;
  double s = sigma * std::pow(static_cast<double>(N), -alpha);
  double q = 1.0 / (1.0 + s);
  double expected = (1.0 - q) / (1.0 - std::pow(q, static_cast<double>(N)));
  CHECK(fixation_prob_exact(N, sigma, 1, alpha) ==
        doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("fixation probability against the absorbing type chain") {
  struct Case {
    std::int64_t N, m;
    double sigma;
  };
  for (const Case& c : {Case{4, 1, 1.0}, Case{5, 2, 0.8}}) {
    double s = c.sigma;  // alpha = 0
    ModelParams p = make_params(c.N, 0.0, 0.5, SelectionScheme::FTW, {{c.m, s}});
    std::vector<double> hit_zero = absorption_probs(build_Q_Y_ftw(p), StateLabel::count(0));
    double oracle = hit_zero[static_cast<std::size_t>(c.N - 1)];
    CHECK(std::fabs(fixation_prob_exact(c.N, c.sigma, c.m, 0.0) - oracle) <= 1e-12);
  }
}

TEST_CASE("vanishing selection approaches the neutral fixation chance") {
  for (std::int64_t N : {10, 250}) {
    double p = fixation_prob_exact(N, 1e-12, 2, 0.0);
    CHECK(std::fabs(p - 1.0 / static_cast<double>(N)) <= 1e-7 / static_cast<double>(N));
  }
}

TEST_CASE("fixation probability grows with selection strength and order") {
  const std::int64_t N = 200;
  CHECK(fixation_prob_exact(N, 2.0, 1, 0.5) > fixation_prob_exact(N, 1.0, 1, 0.5));
  CHECK(fixation_prob_exact(N, 1.0, 3, 0.5) > fixation_prob_exact(N, 1.0, 1, 0.5));
  CHECK_THROWS_AS(fixation_prob_exact(0, 1.0, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fixation_prob_exact(10, 0.0, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fixation_prob_exact(10, 1.0, 0, 0.0), std::invalid_argument);
}

TEST_CASE("the fixation curve is a normalised prefix sum") {
  const std::int64_t N = 50;
  const double sigma = 1.0;
  for (std::int64_t m : {1, 2}) {
    std::vector<double> curve = fixation_curve(N, sigma, m, 0.0);
    REQUIRE(curve.size() == static_cast<std::size_t>(N) + 1);
    CHECK(curve[0] == 0.0);
    CHECK(curve[static_cast<std::size_t>(N)] == 1.0);
    for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] > curve[k - 1]);
    double p = fixation_prob_exact(N, sigma, m, 0.0);
    CHECK(std::fabs((1.0 - curve[static_cast<std::size_t>(N) - 1]) - p) <= 1e-12 * p);
  }

  // full curve against the absorbing type chain
  const std::int64_t n_small = 6;
  std::vector<double> curve = fixation_curve(n_small, 0.7, 2, 0.0);
  ModelParams p = make_params(n_small, 0.0, 0.5, SelectionScheme::FTW, {{2, 0.7}});
  std::vector<double> hit_top = absorption_probs(build_Q_Y_ftw(p), StateLabel::count(n_small));
  for (std::size_t k = 0; k < curve.size(); ++k)
    CHECK(std::fabs(curve[k] - hit_top[k]) <= 1e-11);
}

TEST_CASE("mean stationary line count equals size times fixation chance") {
  for (std::int64_t N : {10, 60}) {
    for (std::int64_t m : {1, 2}) {
      for (double alpha : {0.0, 0.5}) {
        double via_fix = expected_R_inf(N, 1.0, m, alpha);
        double direct = expected_R_inf_direct(N, 1.0, m, alpha);
        CHECK(std::fabs(via_fix - direct) <= 1e-8 * (1.0 + via_fix));
      }
    }
  }
  CHECK_THROWS_AS(expected_R_inf_direct(101, 1.0, 1, 0.0), std::invalid_argument);
}

TEST_CASE("fixation chance approaches the weak-selection prediction from below N") {
  for (std::int64_t m : {1, 2, 3}) {
    std::vector<HaldaneRow> rows = haldane_scan(1.0, m, 0.5, {1000, 100000});
    REQUIRE(rows.size() == 2);
    CHECK(std::fabs(rows[1].ratio - 1.0) < std::fabs(rows[0].ratio - 1.0));
    CHECK(std::fabs(rows[1].ratio - 1.0) <= 0.05);
    CHECK(rows[0].prediction ==
          doctest::Approx(static_cast<double>(m) / std::sqrt(1000.0)).epsilon(1e-14));
  }
}
