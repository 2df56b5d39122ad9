#include <doctest.h>

#include "moran/dualities.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

using namespace moran;

TEST_CASE("duality functions at their boundary arguments") {
  CHECK(H_F(StateLabel::count(7), StateLabel::count(0), 10) == 1.0);
  CHECK(H_F(StateLabel::count(3), StateLabel::count(5), 10) == 0.0);
  CHECK(H_F(StateLabel::count(5), StateLabel::cemetery(), 10) == 0.0);
  CHECK(H_F(StateLabel::count(5), StateLabel::count(2), 10) ==
        doctest::Approx(0.5 * 4.0 / 9.0).epsilon(1e-15));
  CHECK(H_F(StateLabel::count(10), StateLabel::count(10), 10) == 1.0);
  CHECK_THROWS_AS(H_F(StateLabel::cemetery(), StateLabel::count(1), 10),
                  std::invalid_argument);

  CHECK(H_S(StateLabel::count(4), StateLabel::count(4)) == 1.0);
  CHECK(H_S(StateLabel::count(3), StateLabel::count(4)) == 0.0);
  CHECK_THROWS_AS(H_S(StateLabel::cemetery(), StateLabel::count(0)),
                  std::invalid_argument);

  CHECK(H_moment(0.7, StateLabel::count(3)) == doctest::Approx(0.343).epsilon(1e-15));
  CHECK(H_moment(0.7, StateLabel::count(0)) == 1.0);
  CHECK(H_moment(0.7, StateLabel::cemetery()) == 0.0);
}

TEST_CASE("all finite checks are exact at t = 0") {
  ModelParams p = make_params(6, 0.5, 0.3, SelectionScheme::FTW, {{1, 0.2}, {2, 0.3}});
  CHECK(check_factorial_duality(p, 0.0).max_abs_residual == 0.0);
  CHECK(check_ytilde_L_duality(p, 0.0).max_abs_residual == 0.0);
  CHECK(check_siegmund_duality(p, 0.0).max_abs_residual == 0.0);
  CHECK(check_descendant_equality(p, 0.0).max_abs_residual == 0.0);
}

TEST_CASE("factorial moments of the type chain match the killed counter") {
  ModelParams p = make_params(12, 0.4, 0.3, SelectionScheme::FTW, {{1, 0.2}, {3, 0.15}});
  for (double t : {0.1, 1.0, 10.0}) {
    DualityReport rep = check_factorial_duality(p, t);
    CHECK(rep.max_abs_residual <= 1e-10);
    CHECK(rep.identity == "factorial");
    CHECK(rep.N == 12);
  }

  ModelParams dom = make_params(8, 0.6, 0.45, SelectionScheme::DOM, {{1, 0.5}, {2, 0.25}});
  CHECK(check_factorial_duality(dom, 0.3).max_abs_residual <= 1e-10);
}

TEST_CASE("conditioned excursions match the pruned counter") {
  ModelParams p = make_params(10, 0.5, 0.35, SelectionScheme::FTW, {{1, 0.3}, {2, 0.2}});
  for (double t : {0.3, 2.0}) {
    DualityReport rep = check_ytilde_L_duality(p, t);
    CHECK(rep.max_abs_residual <= 1e-10);
  }
}

TEST_CASE("level crossings of the type chain match the reflected dual") {
  ModelParams p = make_params(10, 0.25, 0.4, SelectionScheme::FTW, {{2, 0.5}});
  for (double t : {0.3, 2.0}) {
    DualityReport rep = check_siegmund_duality(p, t);
    CHECK(rep.max_abs_residual <= 1e-10);
  }
}

TEST_CASE("rational conjugation between the dual generators is exact") {
  ModelParams p = make_params(8, 0.7, 0.3, SelectionScheme::FTW, {{1, 0.25}, {2, 0.5}});
  DualityReport rep = check_conjugation(p);
  CHECK(rep.max_abs_residual == 0.0);
  CHECK(rep.mean_abs_residual == 0.0);

  ModelParams dom = make_params(5, 0.3, 0.6, SelectionScheme::DOM,
                                {{1, 0.4}, {2, 0.2}, {3, 0.2}});
  CHECK(check_conjugation(dom).max_abs_residual == 0.0);

  ModelParams big = make_params(30, 0.1, 0.5, SelectionScheme::FTW, {{1, 0.1}});
  CHECK_THROWS_AS(check_conjugation(big), std::invalid_argument);
}

TEST_CASE("tagged progeny mean equals the conditioned excursion mean") {
  ModelParams p = make_params(6, 0.45, 0.3, SelectionScheme::FTW, {{1, 0.2}, {2, 0.25}});
  for (double t : {0.5, 2.0}) {
    DualityReport rep = check_descendant_equality(p, t);
    CHECK(rep.max_abs_residual <= 1e-10);
  }
  ModelParams big = make_params(21, 0.1, 0.5, SelectionScheme::FTW, {{1, 0.1}});
  CHECK_THROWS_AS(check_descendant_equality(big, 1.0), std::invalid_argument);
}

TEST_CASE("reports serialise with state labels and an infinite-time marker") {
  ModelParams p = make_params(6, 0.5, 0.3, SelectionScheme::FTW, {{1, 0.2}});
  DualityReport rep = check_factorial_duality(p, 0.5);
  nlohmann::json j = nlohmann::json::parse(rep.to_json());
  CHECK(j.at("identity") == "factorial");
  CHECK(j.at("N") == 6);
  CHECK(j.at("t") == 0.5);
  CHECK(j.at("max_abs_residual").is_number());
  CHECK(j.at("argmax").is_array());
  CHECK(j.at("params").at("N") == 6);

  DualityReport inf_rep;
  inf_rep.identity = "custom";
  inf_rep.t = std::numeric_limits<double>::infinity();
  inf_rep.details_json = R"({"note": 1})";
  nlohmann::json ji = nlohmann::json::parse(inf_rep.to_json());
  CHECK(ji.at("t") == "inf");
  CHECK(ji.at("details").at("note") == 1);
  CHECK(ji.at("params").is_null());
}
