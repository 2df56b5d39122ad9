#include <doctest.h>

#include "moran/diffusion.hpp"

#include <cmath>
#include <vector>

#include "moran/generators.hpp"

using namespace moran;

namespace {

DiffusionParams dparams(double theta, double nu0,
                        std::vector<std::pair<std::int64_t, double>> sigma) {
  DiffusionParams dp;
  dp.theta = theta;
  dp.nu0 = nu0;
  dp.sigma = std::move(sigma);
  return validate(dp);
}

double beta_moment(double a, double b, std::int64_t n) {
  double v = 1.0;
  for (std::int64_t i = 0; i < n; ++i)
    v *= (a + static_cast<double>(i)) / (a + b + static_cast<double>(i));
  return v;
}

double rate_between(const Ctmc& c, std::size_t from, std::size_t to) {
  double r = 0.0;
  for (std::size_t e = c.row_ptr[from]; e < c.row_ptr[from + 1]; ++e)
    if (c.col[e] == to) r += c.rate[e];
  return r;
}

// stationary moments E[(Y/N)^n] of the rescaled finite model
std::vector<double> finite_stationary_moments(std::int64_t N, const DiffusionParams& dp,
                                              std::int64_t n_top) {
  RateMap rates;
  for (const auto& [m, sm] : dp.sigma) rates.emplace_back(m, sm / static_cast<double>(N));
  ModelParams p = make_params(N, dp.theta / static_cast<double>(N), dp.nu0,
                              SelectionScheme::FTW, std::move(rates));
  Dist pi = stationary(build_Q_Y_ftw(p));
  std::vector<double> mom(static_cast<std::size_t>(n_top) + 1, 0.0);
  for (std::size_t i = 0; i < pi.p.size(); ++i) {
    double y = static_cast<double>(pi.states[i].value) / static_cast<double>(N);
    double pw = 1.0;
    for (std::size_t n = 0; n < mom.size(); ++n) {
      mom[n] += pi.p[i] * pw;
      pw *= y;
    }
  }
  return mom;
}

}  // namespace

TEST_CASE("limit window generators have the expected rates") {
  DiffusionParams dp = dparams(0.8, 0.3, {{2, 0.7}});
  TruncatedChain R = build_Q_Rcal(dp, 10);
  std::size_t delta = 11;
  CHECK(R.chain.max_abs_row_sum() <= 1e-12);
  CHECK(rate_between(R.chain, 3, 5) == doctest::Approx(2.1).epsilon(1e-14));
  CHECK(rate_between(R.chain, 3, 2) == doctest::Approx(6.0 + 3 * 0.8 * 0.7).epsilon(1e-14));
  CHECK(rate_between(R.chain, 3, delta) == doctest::Approx(0.72).epsilon(1e-14));
  // overshoot past the window folds onto the edge
  CHECK(rate_between(R.chain, 9, 10) == doctest::Approx(9 * 0.7).epsilon(1e-14));
  CHECK(rate_between(R.chain, 10, 10 - 1) > 0.0);

  TruncatedChain Rabs = build_Q_Rcal(dp, 10, BoundaryPolicy::ABSORB_REPORT);
  CHECK(Rabs.chain.diag[10] == 0.0);

  TruncatedChain L = build_Q_Lcal(dp, 10);
  auto idx = [](std::int64_t n) { return static_cast<std::size_t>(n - 1); };
  CHECK(L.chain.max_abs_row_sum() <= 1e-12);
  CHECK(rate_between(L.chain, idx(3), idx(2)) ==
        doctest::Approx(6.0 + 2 * 0.8 * 0.7 + 0.8 * 0.3).epsilon(1e-14));
  CHECK(rate_between(L.chain, idx(3), idx(1)) == doctest::Approx(0.8 * 0.3).epsilon(1e-14));
  CHECK(rate_between(L.chain, idx(1), idx(3)) == doctest::Approx(0.7).epsilon(1e-14));

  CHECK_THROWS_AS(build_Q_Rcal(dp, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_Q_Lcal(dp, 3), std::invalid_argument);
}

TEST_CASE("without selection the stationary density is Beta") {
  DiffusionParams dp = dparams(1.7, 0.3, {});
  double a = dp.theta * dp.nu1(), b = dp.theta * dp.nu0;
  CHECK(pi_Y_moment(dp, 0) == 1.0);
  for (std::int64_t n = 1; n <= 6; ++n)
    CHECK(pi_Y_moment(dp, n) == doctest::Approx(beta_moment(a, b, n)).epsilon(1e-10));

  DiffusionParams one_sided = dp;
  one_sided.nu0 = 0.999999;
  CHECK_NOTHROW(pi_Y_moment(one_sided, 1));
  DiffusionParams no_mut = dp;
  no_mut.theta = 0.0;
  CHECK_THROWS_AS(pi_Y_moment(no_mut, 1), std::invalid_argument);
}

TEST_CASE("the density exponent carries harmonic weights, not factorial ones") {
  DiffusionParams dp = dparams(1.0, 0.3, {{3, 2.0}});
  std::vector<double> oracle = finite_stationary_moments(600, dp, 3);
  for (std::int64_t n = 1; n <= 3; ++n) {
    double harm = pi_Y_moment(dp, n, DensityExponentForm::HARMONIC);
    double fact = pi_Y_moment(dp, n, DensityExponentForm::FACTORIAL);
    double err_h = std::fabs(harm - oracle[static_cast<std::size_t>(n)]);
    double err_f = std::fabs(fact - oracle[static_cast<std::size_t>(n)]);
    CHECK(err_h <= 5e-3);
    CHECK(err_h < err_f);
  }
}

TEST_CASE("killed-window absorption matches the stationary moments") {
  DiffusionParams dp = dparams(1.0, 0.3, {{1, 1.0}});
  DiffusionDualityResult res = check_diffusion_duality(dp, 20, 200);
  CHECK(res.report.max_abs_residual <= 2e-3);
  CHECK(res.self_consistency_gap <= 1e-6);
  CHECK(res.lhs.size() == 21);
  CHECK(res.rhs.size() == 21);
  CHECK(res.lhs[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.rhs[0] == 1.0);
  CHECK(res.n_max_used >= 400);

  DiffusionParams no_mut = dp;
  no_mut.theta = 0.0;
  CHECK_THROWS_AS(check_diffusion_duality(no_mut), std::invalid_argument);
  CHECK_THROWS_AS(check_diffusion_duality(dp, 300, 200), std::invalid_argument);
}

TEST_CASE("stationary moments agree with a large rescaled population") {
  DiffusionParams dp = dparams(1.0, 0.3, {{1, 1.0}});
  std::vector<double> mom = finite_stationary_moments(1200, dp, 5);
  for (std::int64_t n = 1; n <= 5; ++n)
    CHECK(std::fabs(pi_Y_moment(dp, n) - mom[static_cast<std::size_t>(n)]) <= 5e-3);
}

TEST_CASE("moment dual of the killed window tracks the rescaled forward law") {
  DiffusionParams dp = dparams(1.0, 0.3, {{1, 1.0}});
  const std::int64_t N = 800;
  const double t = 0.3, y0 = 0.5;

  RateMap rates{{1, 1.0 / static_cast<double>(N)}};
  ModelParams p = make_params(N, dp.theta / static_cast<double>(N), dp.nu0,
                              SelectionScheme::FTW, std::move(rates));
  Ctmc QY = build_Q_Y_ftw(p);
  Dist law = transient(QY, dirac(QY, StateLabel::count(N / 2)), static_cast<double>(N) * t);

  for (std::int64_t n = 1; n <= 4; ++n) {
    double fwd = 0.0;
    for (std::size_t i = 0; i < law.p.size(); ++i)
      fwd += law.p[i] *
             std::pow(static_cast<double>(law.states[i].value) / static_cast<double>(N),
                      static_cast<double>(n));
    double bwd = diffusion_moment_dual(dp, y0, n, t);
    CHECK(std::fabs(fwd - bwd) <= 5e-3);
  }
}

TEST_CASE("rescaled moments converge as the population grows") {
  DiffusionParams dp = dparams(1.0, 0.3, {{1, 1.0}});
  std::vector<ConvergenceRow> rows = convergence_diagnostic(dp, {150, 300, 600}, 0.15);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].N == 150);
  CHECK(rows[2].distance == 0.0);
  CHECK(rows[0].distance > rows[1].distance);
  CHECK(rows[1].distance > 0.0);
  CHECK(convergence_diagnostic(dp, {}, 0.1).empty());
}

TEST_CASE("ancestral-type generating function in the limit") {
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};

  DiffusionParams neutral = dparams(1.4, 0.3, {});
  HInfDiffusion hn = h_inf_diffusion(neutral, grid);
  for (std::size_t g = 0; g < grid.size(); ++g) CHECK(hn.h[g] == grid[g]);
  CHECK(hn.self_consistency_gap == 0.0);

  DiffusionParams sel = dparams(1.0, 0.3, {{1, 0.8}, {2, 0.4}});
  HInfDiffusion hs = h_inf_diffusion(sel, grid);
  CHECK(hs.h[0] == 0.0);
  CHECK(hs.h.back() == doctest::Approx(1.0).epsilon(1e-9));
  for (std::size_t g = 1; g < grid.size(); ++g) {
    CHECK(hs.h[g] >= hs.h[g - 1] - 1e-12);
    // lines can only multiply, so the ancestor is fitter than the sample
    CHECK(hs.h[g] <= grid[g] + 1e-12);
  }
  CHECK(hs.self_consistency_gap <= 1e-6);
}
