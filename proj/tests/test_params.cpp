#include <doctest.h>

#include "moran/params.hpp"

#include <cmath>

using namespace moran;

TEST_CASE("dom/ftw conversion round trips") {
  RateMap dom{{1, 0.3}, {2, 0.2}};
  RateMap ftw = dom_to_ftw(dom);
  REQUIRE(ftw.size() == 2);
  CHECK(ftw[0].first == 1);
  CHECK(ftw[0].second == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(ftw[1].second == doctest::Approx(0.2));

  RateMap back = ftw_to_dom(ftw);
  REQUIRE(back.size() == 2);
  // round trip is exact only in rational arithmetic; doubles pick up one ulp
  CHECK(back[0].second == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(back[1].second == doctest::Approx(0.2).epsilon(1e-14));

  // a gap in the dom orders means the densified sequence increases from 0
  CHECK_THROWS_AS(dom_to_ftw(RateMap{{1, 0.3}, {3, 0.1}}), ValidationError);
}

TEST_CASE("dom_to_ftw drops zero differences") {
  // shat_1 = shat_2 = 0.4 -> s_1 = 0, only s_2 = 0.4 survives
  RateMap ftw = dom_to_ftw(RateMap{{1, 0.4}, {2, 0.4}});
  REQUIRE(ftw.size() == 1);
  CHECK(ftw[0].first == 2);
  CHECK(ftw[0].second == doctest::Approx(0.4));
}

TEST_CASE("as_ftw differences rates exactly and is the identity on ftw input") {
  ModelParams p = make_params(10, 0.1, 0.5, SelectionScheme::DOM, {{1, 0.3}, {2, 0.2}});
  ModelParams q = p.as_ftw();
  CHECK(q.selection.scheme == SelectionScheme::FTW);
  REQUIRE(q.selection.rates.size() == 2);
  // rational mirrors subtract exactly, so the double field equals the
  // correctly rounded difference of the binary64 inputs
  CHECK(q.selection.rates[0].second == 0.3 - 0.2);
  CHECK(q.rates_rat[0].second == bigrat(0.3) - bigrat(0.2));
  CHECK(q.rates_rat[1].second == bigrat(0.2));

  ModelParams f = make_params(10, 0.1, 0.5, SelectionScheme::FTW, {{2, 0.7}});
  ModelParams f2 = f.as_ftw();
  CHECK(f2.selection.rates == f.selection.rates);
}

TEST_CASE("validate rejects malformed parameters") {
  auto ok = [] { return make_params(5, 0.2, 0.5, SelectionScheme::FTW, {{1, 0.1}}); };
  CHECK_NOTHROW(validate(ok()));

  ModelParams p = ok();
  p.N = 0;
  CHECK_THROWS_AS(validate(p), ValidationError);

  p = ok();
  p.u = -0.5;
  CHECK_THROWS_AS(validate(p), ValidationError);

  p = ok();
  p.u = std::nan("");
  CHECK_THROWS_AS(validate(p), ValidationError);

  for (double bad_nu0 : {0.0, 1.0, -0.2, 1.7}) {
    CHECK_THROWS_AS(make_params(5, 0.2, bad_nu0, SelectionScheme::FTW, {{1, 0.1}}),
                    ValidationError);
  }

  CHECK_THROWS_AS(make_params(5, 0.2, 0.5, SelectionScheme::FTW, {{0, 0.1}}),
                  ValidationError);
  CHECK_THROWS_AS(make_params(5, 0.2, 0.5, SelectionScheme::FTW, {{1, 0.1}, {1, 0.2}}),
                  ValidationError);
  CHECK_THROWS_AS(make_params(5, 0.2, 0.5, SelectionScheme::FTW, {{1, -0.1}}),
                  ValidationError);

  CHECK_THROWS_WITH_AS(make_params(5, 0.2, 0.5, SelectionScheme::FTW, {}),
                       "trivial neutral case: effective branching rate must be > 0",
                       ValidationError);
  CHECK_THROWS_AS(make_params(5, 0.2, 0.5, SelectionScheme::FTW, {{1, 0.0}}),
                  ValidationError);

  CHECK_THROWS_WITH_AS(make_params(5, 0.2, 0.5, SelectionScheme::DOM, {{1, 0.1}, {2, 0.2}}),
                       "DOM rates: non-increasing violated", ValidationError);
}

TEST_CASE("effective branching rate weights each order by its arity") {
  SelectionSpec ftw{SelectionScheme::FTW, {{1, 0.1}, {3, 0.2}}};
  CHECK(effective_branching_rate(ftw) == doctest::Approx(0.7));

  SelectionSpec dom{SelectionScheme::DOM, {{1, 0.3}, {2, 0.2}}};
  // s_1 = 0.1, s_2 = 0.2 -> b = 0.1 + 2 * 0.2
  CHECK(effective_branching_rate(dom) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("parameter JSON accepts fractions and rejects unknown keys") {
  ModelParams p = params_from_json(R"({
    "N": 12,
    "u": "1/3",
    "nu0": 0.25,
    "selection": {"scheme": "ftw", "rates": [[1, 0.05], [2, "1/8"]]}
  })");
  CHECK(p.N == 12);
  CHECK(p.u == 1.0 / 3.0);
  CHECK(p.u_rat == bigrat(1) / 3);
  CHECK(p.nu0 == 0.25);
  CHECK(p.selection.scheme == SelectionScheme::FTW);
  REQUIRE(p.selection.rates.size() == 2);
  CHECK(p.rates_rat[1].second == bigrat(1) / 8);
  CHECK(p.selection.rates[1].second == 0.125);

  CHECK_THROWS_AS(params_from_json(R"({"N": 5, "u": 0.1, "nu0": 0.5, "mu": 1,
    "selection": {"scheme": "ftw", "rates": [[1, 0.1]]}})"),
                  ValidationError);
  CHECK_THROWS_AS(params_from_json(R"({"N": 5, "u": 0.1, "nu0": 0.5,
    "selection": {"scheme": "ftw", "rates": [[1, 0.1]], "extra": 0}})"),
                  ValidationError);
  CHECK_THROWS_AS(params_from_json(R"({"N": 5, "u": 0.1, "nu0": 0.5,
    "selection": {"scheme": "other", "rates": [[1, 0.1]]}})"),
                  ValidationError);
  CHECK_THROWS_AS(params_from_json("not json"), ValidationError);
  CHECK_THROWS_AS(params_from_json(R"({"N": 5, "u": "1/0", "nu0": 0.5,
    "selection": {"scheme": "ftw", "rates": [[1, 0.1]]}})"),
                  ValidationError);
}

TEST_CASE("parameter JSON echo round trips the binary64 fields") {
  ModelParams p = make_params(7, 1.0 / 3.0, 0.3, SelectionScheme::DOM, {{1, 0.2}, {2, 0.1}});
  ModelParams q = params_from_json(params_to_json(p));
  CHECK(q.N == p.N);
  CHECK(q.u == p.u);
  CHECK(q.nu0 == p.nu0);
  CHECK(q.selection.scheme == p.selection.scheme);
  CHECK(q.selection.rates == p.selection.rates);
}

TEST_CASE("parse_rational handles integers, fractions and rejects junk") {
  CHECK(parse_rational("3") == bigrat(3));
  CHECK(parse_rational("-2/6") == bigrat(-1) / 3);
  CHECK_THROWS_AS(parse_rational("1/0"), ValidationError);
  CHECK_THROWS_AS(parse_rational("a/b"), ValidationError);
  CHECK_THROWS_AS(parse_rational(""), ValidationError);
  CHECK_THROWS_AS(parse_rational("1.5"), ValidationError);
}

TEST_CASE("diffusion parameters validate and round trip through JSON") {
  DiffusionParams dp = dparams_from_json(R"({"theta": 1.5, "nu0": 0.3,
    "sigma": [[1, 1.0], [3, 0.5]]})");
  CHECK(dp.theta == 1.5);
  CHECK(dp.nu1() == doctest::Approx(0.7));
  CHECK(dp.total_sigma() == doctest::Approx(1.5));
  CHECK(dp.max_order() == 3);

  DiffusionParams echo = dparams_from_json(dparams_to_json(dp));
  CHECK(echo.theta == dp.theta);
  CHECK(echo.sigma == dp.sigma);

  DiffusionParams bad = dp;
  bad.theta = -1.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = dp;
  bad.nu0 = 1.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = dp;
  bad.sigma = {{0, 1.0}};
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad.sigma = {{2, 1.0}, {2, 0.5}};
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad.sigma = {{2, -1.0}};
  CHECK_THROWS_AS(validate(bad), ValidationError);
}
