#include <doctest.h>

#include "moran/ctmc.hpp"

#include <cmath>
#include <sstream>
#include <vector>

using namespace moran;

namespace {

std::vector<StateLabel> counts(std::int64_t n) {
  std::vector<StateLabel> st;
  for (std::int64_t k = 0; k < n; ++k) st.push_back(StateLabel::count(k));
  return st;
}

Ctmc two_state(double a, double b) {
  CtmcBuilder bld(counts(2));
  bld.add(0, 1, a);
  bld.add(1, 0, b);
  return bld.finish();
}

// ruin chain on 0..N with unit nearest-neighbour rates, absorbing ends
Ctmc ruin_chain(std::int64_t N) {
  CtmcBuilder bld(counts(N + 1));
  for (std::int64_t k = 1; k < N; ++k) {
    bld.add(static_cast<std::size_t>(k), static_cast<std::size_t>(k - 1), 1.0);
    bld.add(static_cast<std::size_t>(k), static_cast<std::size_t>(k + 1), 1.0);
  }
  return bld.finish();
}

// column k of Q applied from the left: (pi Q)_k
double pi_q_component(const Ctmc& c, const std::vector<double>& pi, std::size_t k) {
  double acc = pi[k] * c.diag[k];
  for (std::size_t i = 0; i < c.n(); ++i)
    for (std::size_t e = c.row_ptr[i]; e < c.row_ptr[i + 1]; ++e)
      if (c.col[e] == k) acc += pi[i] * c.rate[e];
  return acc;
}

}  // namespace

TEST_CASE("state labels order, compare and print") {
  CHECK(StateLabel::count(12).str() == "12");
  CHECK(StateLabel::cemetery().str() == "DELTA");
  CHECK(StateLabel::count(5) < StateLabel::cemetery());
  CHECK_FALSE(StateLabel::cemetery() < StateLabel::count(1000));
  CHECK(StateLabel::cemetery() == StateLabel::cemetery());
  CHECK_FALSE(StateLabel::count(1) == StateLabel::count(2));
}

TEST_CASE("builder sums duplicates, skips zeros, rejects bad input") {
  std::vector<StateLabel> st = counts(2);
  st.push_back(StateLabel::cemetery());
  CtmcBuilder bld(st);
  bld.add(0, 1, 0.5);
  bld.add(0, 1, 0.25);
  bld.add(1, 0, 1.0);
  bld.add(1, 2, 0.0);
  Ctmc c = bld.finish();

  REQUIRE(c.n() == 3);
  CHECK(c.row_ptr[1] - c.row_ptr[0] == 1);
  CHECK(c.rate[c.row_ptr[0]] == 0.75);
  CHECK(c.diag[0] == -0.75);
  CHECK(c.row_ptr[2] - c.row_ptr[1] == 1);  // the zero rate was dropped
  CHECK(c.diag[2] == 0.0);
  CHECK(c.max_abs_row_sum() == 0.0);

  CHECK(c.index_of(StateLabel::count(1)) == 1);
  CHECK(c.find(StateLabel::cemetery()).value() == 2);
  CHECK_FALSE(c.find(StateLabel::count(7)).has_value());
  CHECK_THROWS_AS(c.index_of(StateLabel::count(7)), std::out_of_range);

  CtmcBuilder bad(counts(2));
  CHECK_THROWS_AS(bad.add(0, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bad.add(0, 1, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(bad.add(0, 5, 1.0), std::out_of_range);

  std::vector<StateLabel> dup{StateLabel::count(3), StateLabel::count(3)};
  CtmcBuilder dup_bld(dup);
  CHECK_THROWS_AS(dup_bld.finish(), std::invalid_argument);
}

TEST_CASE("two-state transient matches the closed form") {
  const double a = 1.3, b = 0.7;
  Ctmc c = two_state(a, b);
  Dist p0 = dirac(c, StateLabel::count(0));

  for (double t : {0.1, 1.0, 10.0}) {
    Dist pt = transient(c, p0, t);
    double expected = a / (a + b) * (1.0 - std::exp(-(a + b) * t));
    CHECK(pt.p[1] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pt.p[0] + pt.p[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  Dist copy = transient(c, p0, 0.0);
  CHECK(copy.p == p0.p);

  // long horizon exercises the chunked uniformization path
  Dist far = transient(c, p0, 400.0);
  CHECK(far.p[1] == doctest::Approx(a / (a + b)).epsilon(1e-11));

  Dist one = transient(c, transient(c, p0, 0.7), 0.4);
  Dist direct = transient(c, p0, 1.1);
  CHECK(one.p[0] == doctest::Approx(direct.p[0]).epsilon(1e-11));
  CHECK(one.p[1] == doctest::Approx(direct.p[1]).epsilon(1e-11));

  CHECK_THROWS_AS(transient(c, p0, -1.0), std::invalid_argument);
}

TEST_CASE("transient on a rate-free chain returns the input") {
  CtmcBuilder bld(counts(2));
  Ctmc c = bld.finish();
  Dist p0 = make_dist(c, {0.3, 0.7});
  Dist pt = transient(c, p0, 5.0);
  CHECK(pt.p == p0.p);
}

TEST_CASE("stationary distributions: birth-death and cyclic chains") {
  // reflected queue, detailed balance gives a geometric law
  const double up = 0.7, down = 1.1;
  const std::int64_t K = 8;
  CtmcBuilder bld(counts(K + 1));
  for (std::int64_t k = 0; k < K; ++k) {
    bld.add(static_cast<std::size_t>(k), static_cast<std::size_t>(k + 1), up);
    bld.add(static_cast<std::size_t>(k + 1), static_cast<std::size_t>(k), down);
  }
  Ctmc queue = bld.finish();
  Dist pi = stationary(queue);
  double z = 0.0, r = up / down;
  for (std::int64_t k = 0; k <= K; ++k) z += std::pow(r, static_cast<double>(k));
  for (std::int64_t k = 0; k <= K; ++k)
    CHECK(pi.p[static_cast<std::size_t>(k)] ==
          doctest::Approx(std::pow(r, static_cast<double>(k)) / z).epsilon(1e-13));

  // a 3-cycle is not birth-death; flow balance gives pi proportional to 1/rate
  CtmcBuilder cyc(counts(3));
  cyc.add(0, 1, 2.0);
  cyc.add(1, 2, 0.5);
  cyc.add(2, 0, 1.25);
  Ctmc cycle = cyc.finish();
  Dist pc = stationary(cycle);
  double w0 = 1 / 2.0, w1 = 1 / 0.5, w2 = 1 / 1.25, wz = w0 + w1 + w2;
  CHECK(pc.p[0] == doctest::Approx(w0 / wz).epsilon(1e-12));
  CHECK(pc.p[1] == doctest::Approx(w1 / wz).epsilon(1e-12));
  CHECK(pc.p[2] == doctest::Approx(w2 / wz).epsilon(1e-12));
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(std::fabs(pi_q_component(cycle, pc.p, k)) <= 1e-10);
}

TEST_CASE("stationary needs an anchor when several closed classes exist") {
  Ctmc ruin = ruin_chain(4);
  CHECK_THROWS_AS(stationary(ruin), std::runtime_error);
  Dist left = stationary(ruin, StateLabel::count(0));
  CHECK(left.p[0] == 1.0);
  Dist right = stationary(ruin, StateLabel::count(4));
  CHECK(right.p[4] == 1.0);
  // anchor must sit inside a closed class
  CHECK_THROWS_AS(stationary(ruin, StateLabel::count(2)), std::runtime_error);
}

TEST_CASE("closed classes of a ruin chain are the two absorbing ends") {
  Ctmc ruin = ruin_chain(6);
  auto classes = closed_classes(ruin);
  REQUIRE(classes.size() == 2);
  CHECK(classes[0] == std::vector<std::size_t>{0});
  CHECK(classes[1] == std::vector<std::size_t>{6});

  Ctmc c = two_state(1.0, 2.0);
  auto irr = closed_classes(c);
  REQUIRE(irr.size() == 1);
  CHECK(irr[0] == std::vector<std::size_t>{0, 1});
}

TEST_CASE("ruin absorption probabilities are linear in the start") {
  const std::int64_t N = 10;
  Ctmc ruin = ruin_chain(N);
  std::vector<double> h = absorption_probs(ruin, StateLabel::count(N));
  for (std::int64_t k = 0; k <= N; ++k)
    CHECK(h[static_cast<std::size_t>(k)] ==
          doctest::Approx(static_cast<double>(k) / static_cast<double>(N)).epsilon(1e-12));

  // plug back: (Q h)_k = 0 on transient states
  for (std::size_t k = 1; k < static_cast<std::size_t>(N); ++k) {
    double acc = ruin.diag[k] * h[k];
    for (std::size_t e = ruin.row_ptr[k]; e < ruin.row_ptr[k + 1]; ++e)
      acc += ruin.rate[e] * h[ruin.col[e]];
    CHECK(std::fabs(acc) <= 1e-12);
  }

  CHECK_THROWS_AS(absorption_probs(ruin, StateLabel::count(5)), std::invalid_argument);

  // non-singleton closed class: irreducible pair plus a separate target
  CtmcBuilder bld(counts(3));
  bld.add(0, 1, 1.0);
  bld.add(1, 0, 1.0);
  Ctmc mixed = bld.finish();
  CHECK_THROWS_AS(absorption_probs(mixed, StateLabel::count(2)), std::runtime_error);
}

TEST_CASE("make_dist clamps roundoff and rejects real violations") {
  Ctmc c = two_state(1.0, 1.0);
  Dist d = make_dist(c, {1.0 + 5e-15, -5e-15});
  CHECK(d.p[1] == 0.0);
  CHECK_THROWS_AS(make_dist(c, {1.0, -1e-13}), std::runtime_error);
  CHECK_THROWS_AS(make_dist(c, {0.5, 0.4}), std::runtime_error);
  CHECK_THROWS_AS(make_dist(c, {1.0}), std::invalid_argument);
  CHECK_NOTHROW(make_dist(c, {0.5, 0.5 + 5e-11}));
}

TEST_CASE("simulate is reproducible and consistent with the transient law") {
  Ctmc c = two_state(1.5, 0.9);
  Rng r1(42), r2(42), r3(43);
  PathSample a = simulate(c, StateLabel::count(0), 20.0, r1);
  PathSample b = simulate(c, StateLabel::count(0), 20.0, r2);
  CHECK(a.times == b.times);
  CHECK(a.states.size() == b.states.size());
  PathSample other = simulate(c, StateLabel::count(0), 20.0, r3);
  CHECK(a.times != other.times);

  REQUIRE(a.times.size() >= 2);
  CHECK(a.times.front() == 0.0);
  CHECK(a.states.front() == StateLabel::count(0));
  for (std::size_t i = 1; i < a.times.size(); ++i) {
    CHECK(a.times[i] > a.times[i - 1]);
    CHECK(a.times[i] <= 20.0);
    CHECK_FALSE(a.states[i] == a.states[i - 1]);
  }

  // empirical law at the horizon against the uniformized solution
  CtmcBuilder bld(counts(3));
  bld.add(0, 1, 1.0);
  bld.add(1, 2, 0.5);
  bld.add(1, 0, 0.4);
  bld.add(2, 0, 0.3);
  Ctmc c3 = bld.finish();
  const double horizon = 0.8;
  const int reps = 20000;
  std::vector<double> freq(3, 0.0);
  for (int i = 0; i < reps; ++i) {
    Rng rng(977, static_cast<std::uint64_t>(i));
    PathSample path = simulate(c3, StateLabel::count(0), horizon, rng);
    freq[static_cast<std::size_t>(path.states.back().value)] += 1.0 / reps;
  }
  Dist pt = transient(c3, dirac(c3, StateLabel::count(0)), horizon);
  double tv = 0.0;
  for (std::size_t k = 0; k < 3; ++k) tv += 0.5 * std::fabs(freq[k] - pt.p[k]);
  CHECK(tv <= 0.02);
}

TEST_CASE("expect evaluates a functional against the distribution") {
  Ctmc c = two_state(1.0, 1.0);
  Dist d = make_dist(c, {0.25, 0.75});
  double mean = expect(d, [](const StateLabel& s) { return static_cast<double>(s.value); });
  CHECK(mean == doctest::Approx(0.75));
}

TEST_CASE("distribution CSV and generator export have a fixed layout") {
  std::vector<StateLabel> st = counts(2);
  st.push_back(StateLabel::cemetery());
  CtmcBuilder bld(st);
  bld.add(0, 1, 0.5);
  bld.add(1, 0, 0.25);
  Ctmc c = bld.finish();

  Dist d = make_dist(c, {0.25, 0.5, 0.25});
  std::ostringstream csv;
  write_dist_csv(d, csv);
  CHECK(csv.str() == "state,probability\n0,0.25\n1,0.5\nDELTA,0.25\n");

  std::ostringstream mm;
  export_matrix_market(c, mm);
  CHECK(mm.str() ==
        "%%MatrixMarket-style coordinate real general (0-based indices)\n"
        "3 3 5\n"
        "0 0 -0.5\n"
        "0 1 0.5\n"
        "1 1 -0.25\n"
        "1 0 0.25\n"
        "2 2 0\n");

  double third = 1.0 / 3.0;
  CHECK(std::stod(format_double(third)) == third);
  CHECK(format_double(0.25) == "0.25");
}
