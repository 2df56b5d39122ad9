#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moran/rng.hpp"

namespace moran {

struct StateLabel {
  enum class Kind { Count, Cemetery };
  Kind kind = Kind::Count;
  std::int64_t value = 0;

  static StateLabel count(std::int64_t k) { return {Kind::Count, k}; }
  static StateLabel cemetery() { return {Kind::Cemetery, 0}; }
  bool is_cemetery() const { return kind == Kind::Cemetery; }

  // Cemetery sorts after every Count so Delta is always the last index
  friend bool operator<(const StateLabel& a, const StateLabel& b) {
    if (a.kind != b.kind) return a.kind == Kind::Count;
    return a.value < b.value;
  }
  friend bool operator==(const StateLabel& a, const StateLabel& b) {
    return a.kind == b.kind && (a.kind == Kind::Cemetery || a.value == b.value);
  }
  std::string str() const;
};

// Sparse generator: CSR over off-diagonal rates plus a materialised diagonal.
struct Ctmc {
  std::vector<StateLabel> states;
  std::vector<std::size_t> row_ptr;  // size n()+1
  std::vector<std::uint32_t> col;
  std::vector<double> rate;  // off-diagonal, >= 0
  std::vector<double> diag;  // -sum of row off-diagonals

  std::size_t n() const { return states.size(); }
  std::size_t index_of(const StateLabel& s) const;  // throws if absent
  std::optional<std::size_t> find(const StateLabel& s) const;

  // max over rows of |sum of row entries including diagonal|
  double max_abs_row_sum() const;

 private:
  friend struct CtmcBuilder;
  std::map<StateLabel, std::size_t> lookup_;
};

// Accumulating triplet builder; duplicate (from, to) contributions are summed.
struct CtmcBuilder {
  explicit CtmcBuilder(std::vector<StateLabel> states);
  void add(std::size_t from, std::size_t to, double r);
  Ctmc finish();

 private:
  std::vector<StateLabel> states_;
  std::vector<std::map<std::uint32_t, double>> rows_;
};

struct Dist {
  std::vector<StateLabel> states;
  std::vector<double> p;
};

struct PathSample {
  std::vector<double> times;  // strictly increasing, starts at 0
  std::vector<StateLabel> states;
  std::uint64_t seed = 0;
};

Dist dirac(const Ctmc& chain, const StateLabel& x0);

// validates: entries below -1e-14 are an error, [-1e-14, 0) clamped,
// sum within 1e-10 of one
Dist make_dist(const Ctmc& chain, std::vector<double> p);

// strongly connected components with no outgoing edge (each sorted ascending)
std::vector<std::vector<std::size_t>> closed_classes(const Ctmc& chain);

// pi Q = 0, sum pi = 1 on the unique closed class (or the class holding
// `anchor` when several exist). Birth-death classes use the log-domain
// product formula, everything else a sparse LU solve. The result is checked:
// residual ||pi Q||_inf <= 1e-10 or an exception is thrown.
Dist stationary(const Ctmc& chain, std::optional<StateLabel> anchor = std::nullopt);

// P(hit `target` | start = x) for every state x; requires every closed class
// to be a singleton (absorbing) and `target` absorbing
std::vector<double> absorption_probs(const Ctmc& chain, const StateLabel& target);

// p0 exp(Qt) by uniformization; discarded Poisson tail mass < tol
Dist transient(const Ctmc& chain, const Dist& p0, double t, double tol = 1e-12);

// Gillespie path over [0, horizon]
PathSample simulate(const Ctmc& chain, const StateLabel& x0, double horizon, Rng& rng);

double expect(const Dist& dist, const std::function<double(const StateLabel&)>& f);

// CSV "state,probability", Delta rendered as DELTA, %.17g values
void write_dist_csv(const Dist& dist, std::ostream& os);

// Matrix-Market-style text: comment header, "nrows ncols nnz", then
// "row col value" triplets with 0-based indices (diagonal included)
void export_matrix_market(const Ctmc& chain, std::ostream& os);

// printf %.17g, round-trip exact for binary64
std::string format_double(double x);

}  // namespace moran
