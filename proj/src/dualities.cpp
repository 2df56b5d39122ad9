#include "moran/dualities.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "moran/generators.hpp"
#include "moran/parallel.hpp"

namespace moran {

namespace {

// running max/mean of |lhs - rhs| over a grid of state pairs
struct ResidualScan {
  double max = 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  StateLabel arg_k = StateLabel::count(0);
  StateLabel arg_n = StateLabel::count(0);

  void feed(const StateLabel& k, const StateLabel& n, double lhs, double rhs) {
    double r = std::abs(lhs - rhs);
    sum += r;
    ++count;
    if (r > max) {
      max = r;
      arg_k = k;
      arg_n = n;
    }
  }

  void finish(DualityReport& rep) const {
    rep.max_abs_residual = max;
    rep.mean_abs_residual = count ? sum / static_cast<double>(count) : 0.0;
    rep.argmax_k = arg_k.str();
    rep.argmax_n = arg_n.str();
  }
};

}  // namespace

std::string DualityReport::to_json() const {
  nlohmann::json j;
  j["identity"] = identity;
  j["N"] = N;
  j["params"] = params_json.empty() ? nlohmann::json(nullptr)
                                    : nlohmann::json::parse(params_json);
  if (std::isfinite(t))
    j["t"] = t;
  else
    j["t"] = "inf";
  j["max_abs_residual"] = max_abs_residual;
  j["argmax"] = {argmax_k, argmax_n};
  j["mean_abs_residual"] = mean_abs_residual;
  if (!details_json.empty()) j["details"] = nlohmann::json::parse(details_json);
  return j.dump();
}

double H_F(const StateLabel& k, const StateLabel& n, std::int64_t N) {
  if (n.is_cemetery()) return 0.0;
  if (k.is_cemetery()) throw std::invalid_argument("H_F: first argument must be a count");
  double prod = 1.0;
  for (std::int64_t i = 0; i < n.value; ++i) {
    prod *= static_cast<double>(k.value - i) / static_cast<double>(N - i);
    if (prod == 0.0) break;
  }
  return prod;
}

double H_S(const StateLabel& x, const StateLabel& x_star) {
  if (x.is_cemetery() || x_star.is_cemetery())
    throw std::invalid_argument("H_S: counts required");
  return x.value >= x_star.value ? 1.0 : 0.0;
}

double H_moment(double y, const StateLabel& n) {
  if (n.is_cemetery()) return 0.0;
  double prod = 1.0;
  for (std::int64_t i = 0; i < n.value; ++i) prod *= y;
  return prod;
}

DualityReport check_factorial_duality(const ModelParams& p, double t, double tol) {
  ModelParams q = p.as_ftw();
  std::int64_t N = q.N;
  Ctmc QY = build_Q_Y_ftw(q);
  Ctmc QR = build_Q_R(q);
  std::size_t ny = QY.n(), nr = QR.n();

  std::vector<Dist> law_y(ny), law_r(nr);
  parallel_for(ny, [&](std::size_t i) {
    law_y[i] = transient(QY, dirac(QY, QY.states[i]), t, tol);
  });
  parallel_for(nr, [&](std::size_t i) {
    law_r[i] = transient(QR, dirac(QR, QR.states[i]), t, tol);
  });

  // H[k][j] = H_F(k, state_j of R-space)
  std::vector<std::vector<double>> H(ny, std::vector<double>(nr));
  for (std::size_t k = 0; k < ny; ++k)
    for (std::size_t j = 0; j < nr; ++j) H[k][j] = H_F(QY.states[k], QR.states[j], N);

  ResidualScan scan;
  for (std::size_t k = 0; k < ny; ++k)
    for (std::size_t j = 0; j < nr; ++j) {
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t y = 0; y < ny; ++y) lhs += law_y[k].p[y] * H[y][j];
      for (std::size_t r = 0; r < nr; ++r) rhs += law_r[j].p[r] * H[k][r];
      scan.feed(QY.states[k], QR.states[j], lhs, rhs);
    }

  DualityReport rep;
  rep.identity = "factorial";
  rep.N = N;
  rep.params_json = params_to_json(p);
  rep.t = t;
  scan.finish(rep);
  return rep;
}

DualityReport check_ytilde_L_duality(const ModelParams& p, double t, double tol) {
  ModelParams q = p.as_ftw();
  std::int64_t N = q.N;
  Ctmc QYt = build_Q_Ytilde(q);
  Ctmc QL = build_Q_L(q);
  std::size_t ny = QYt.n(), nl = QL.n();

  std::vector<Dist> law_y(ny), law_l(nl);
  parallel_for(ny, [&](std::size_t i) {
    law_y[i] = transient(QYt, dirac(QYt, QYt.states[i]), t, tol);
  });
  parallel_for(nl, [&](std::size_t i) {
    law_l[i] = transient(QL, dirac(QL, QL.states[i]), t, tol);
  });

  std::vector<std::vector<double>> H(ny, std::vector<double>(nl));
  for (std::size_t k = 0; k < ny; ++k)
    for (std::size_t j = 0; j < nl; ++j) H[k][j] = H_F(QYt.states[k], QL.states[j], N);

  ResidualScan scan;
  for (std::size_t k = 0; k < ny; ++k)
    for (std::size_t j = 0; j < nl; ++j) {
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t y = 0; y < ny; ++y) lhs += law_y[k].p[y] * H[y][j];
      for (std::size_t l = 0; l < nl; ++l) rhs += law_l[j].p[l] * H[k][l];
      scan.feed(QYt.states[k], QL.states[j], lhs, rhs);
    }

  DualityReport rep;
  rep.identity = "ytilde_L";
  rep.N = N;
  rep.params_json = params_to_json(p);
  rep.t = t;
  scan.finish(rep);
  return rep;
}

DualityReport check_siegmund_duality(const ModelParams& p, double t, double tol) {
  ModelParams q = p.as_ftw();
  std::int64_t N = q.N;
  Ctmc QY = build_Q_Y_ftw(q);
  Ctmc QS = build_Q_siegmund(q);
  std::size_t ny = QY.n();  // 0..N
  std::size_t ns = QS.n();  // 0..N+1

  std::vector<Dist> law_y(ny), law_s(ns);
  parallel_for(ny, [&](std::size_t i) {
    law_y[i] = transient(QY, dirac(QY, QY.states[i]), t, tol);
  });
  parallel_for(ns, [&](std::size_t i) {
    law_s[i] = transient(QS, dirac(QS, QS.states[i]), t, tol);
  });

  ResidualScan scan;
  for (std::size_t x = 0; x < ny; ++x) {
    for (std::size_t xs = 0; xs < ns; ++xs) {
      double lhs = 0.0;  // P(Y_t >= x*)
      for (std::size_t y = xs; y < ny; ++y) lhs += law_y[x].p[y];
      double rhs = 0.0;  // P(x >= S_t)
      for (std::size_t z = 0; z <= x && z < ns; ++z) rhs += law_s[xs].p[z];
      scan.feed(QY.states[x], QS.states[xs], lhs, rhs);
    }
  }

  DualityReport rep;
  rep.identity = "siegmund";
  rep.N = N;
  rep.params_json = params_to_json(p);
  rep.t = t;
  scan.finish(rep);
  return rep;
}

DualityReport check_conjugation(const ModelParams& p) {
  ModelParams q = p.as_ftw();
  std::int64_t N = q.N;
  if (N > 25) throw std::invalid_argument("check_conjugation: N <= 25 required");

  RatMatrix QR = build_Q_R_rat(q);
  RatMatrix QS = build_Q_siegmund_rat(q);
  RatMatrix T = build_T_rat(N);
  RatMatrix Ti = build_T_inv_rat(N);
  RatMatrix A = conjugate_rat(QR, T, Ti);   // T^-1 Q_R T
  RatMatrix B = conjugate_rat(QS, Ti, T);   // T Q_S T^-1

  auto label_of = [N](std::size_t i) {
    return i <= static_cast<std::size_t>(N) ? StateLabel::count(static_cast<std::int64_t>(i))
                                            : StateLabel::cemetery();
  };

  ResidualScan scan;
  std::size_t n = QR.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      scan.feed(label_of(i), label_of(j), rat_to_double(A[i][j] - QS[i][j]), 0.0);
      scan.feed(label_of(i), label_of(j), rat_to_double(B[i][j] - QR[i][j]), 0.0);
    }

  DualityReport rep;
  rep.identity = "conjugation";
  rep.N = N;
  rep.params_json = params_to_json(p);
  rep.t = 0.0;
  scan.finish(rep);
  return rep;
}

DualityReport check_descendant_equality(const ModelParams& p, double t, double tol) {
  ModelParams q = p.as_ftw();
  std::int64_t N = q.N;
  if (N > 20) throw std::invalid_argument("check_descendant_equality: N <= 20 required");

  DescSpace sp = descendant_space(N);
  Ctmc QD = build_Q_descendant(q);
  Ctmc QYt = build_Q_Ytilde(q);

  auto progeny = [&sp](const StateLabel& s) {
    auto [k, d, b] = sp.states[static_cast<std::size_t>(s.value)];
    (void)k;
    return static_cast<double>(d + b);
  };
  auto value = [](const StateLabel& s) { return static_cast<double>(s.value); };

  std::vector<double> lhs(static_cast<std::size_t>(N) + 1), rhs(lhs.size());
  parallel_for(lhs.size(), [&](std::size_t k) {
    std::int64_t kk = static_cast<std::int64_t>(k);
    std::size_t start = sp.index(kk, kk, 0);
    Dist pd = transient(QD, dirac(QD, StateLabel::count(static_cast<std::int64_t>(start))), t, tol);
    lhs[k] = expect(pd, progeny);
    Dist py = transient(QYt, dirac(QYt, StateLabel::count(kk)), t, tol);
    rhs[k] = expect(py, value);
  });

  ResidualScan scan;
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    StateLabel lab = StateLabel::count(static_cast<std::int64_t>(k));
    scan.feed(lab, lab, lhs[k], rhs[k]);
  }

  DualityReport rep;
  rep.identity = "descendant";
  rep.N = N;
  rep.params_json = params_to_json(p);
  rep.t = t;
  scan.finish(rep);
  return rep;
}

}  // namespace moran
