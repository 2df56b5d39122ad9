#include "moran/generators.hpp"

#include <stdexcept>

namespace moran {

namespace {

void require_ftw(const ModelParams& p, const char* who) {
  if (p.selection.scheme != SelectionScheme::FTW)
    throw std::invalid_argument(std::string(who) + ": FTW parameterisation required");
}

double pow_ratio(std::int64_t k, std::int64_t N, std::int64_t m) {
  double r = static_cast<double>(k) / static_cast<double>(N);
  double v = 1.0;
  for (std::int64_t i = 0; i < m; ++i) v *= r;
  return v;
}

std::vector<StateLabel> count_range(std::int64_t lo, std::int64_t hi, bool with_delta) {
  std::vector<StateLabel> s;
  for (std::int64_t k = lo; k <= hi; ++k) s.push_back(StateLabel::count(k));
  if (with_delta) s.push_back(StateLabel::cemetery());
  return s;
}

}  // namespace

double selection_pressure(const ModelParams& p, std::int64_t k) {
  double s = 0.0;
  for (const auto& [m, sm] : p.selection.rates)
    s += sm * (1.0 - pow_ratio(k, p.N, m));
  return s;
}

Ctmc build_Q_Y_ftw(const ModelParams& p) {
  require_ftw(p, "build_Q_Y_ftw");
  std::int64_t N = p.N;
  CtmcBuilder b(count_range(0, N, false));
  for (std::int64_t k = 0; k <= N; ++k) {
    double kd = static_cast<double>(k), Nd = static_cast<double>(N);
    double neutral = kd * (Nd - kd) / Nd;
    if (k < N) b.add(k, k + 1, neutral + (Nd - kd) * p.u * p.nu1());
    if (k > 0) b.add(k, k - 1, neutral + kd * p.u * p.nu0 + kd * selection_pressure(p, k));
  }
  return b.finish();
}

Ctmc build_Q_Y_dom(const ModelParams& p) {
  if (p.selection.scheme != SelectionScheme::DOM)
    throw std::invalid_argument("build_Q_Y_dom: DOM parameterisation required");
  std::int64_t N = p.N;
  CtmcBuilder b(count_range(0, N, false));
  for (std::int64_t k = 0; k <= N; ++k) {
    double kd = static_cast<double>(k), Nd = static_cast<double>(N);
    double neutral = kd * (Nd - kd) / Nd;
    if (k < N) b.add(k, k + 1, neutral + (Nd - kd) * p.u * p.nu1());
    if (k > 0) {
      double sel = 0.0;
      // a fit individual checks m-1 partners and reproduces onto an unfit
      // target only if all are unfit
      for (const auto& [m, shat] : p.selection.rates)
        sel += shat * (Nd - kd) * pow_ratio(k, N, m);
      b.add(k, k - 1, neutral + kd * p.u * p.nu0 + sel);
    }
  }
  return b.finish();
}

Ctmc build_Q_R(const ModelParams& p) {
  require_ftw(p, "build_Q_R");
  std::int64_t N = p.N;
  // states 0, 1..N, Delta (Delta last)
  CtmcBuilder b(count_range(0, N, true));
  std::size_t delta = static_cast<std::size_t>(N) + 1;
  for (std::int64_t n = 1; n <= N; ++n) {
    double nd = static_cast<double>(n), Nd = static_cast<double>(N);
    if (n >= 2) b.add(n, n - 1, nd * (nd - 1.0) / Nd);
    b.add(n, n - 1, nd * p.u * p.nu1());
    b.add(n, delta, nd * p.u * p.nu0);
    for (const auto& [m, sm] : p.selection.rates) {
      if (sm == 0.0) continue;
      for (std::int64_t j = 1; j <= m && n + j <= N; ++j) {
        bigrat w(branching_coeff(n, m, j) * falling(bigint(N - n), j), ipow(bigint(N), m));
        b.add(n, n + j, sm * nd * rat_to_double(w));
      }
    }
  }
  return b.finish();
}

Ctmc build_Q_L(const ModelParams& p) {
  require_ftw(p, "build_Q_L");
  std::int64_t N = p.N;
  CtmcBuilder b(count_range(1, N, false));
  auto idx = [](std::int64_t n) { return static_cast<std::size_t>(n - 1); };
  for (std::int64_t n = 1; n <= N; ++n) {
    double nd = static_cast<double>(n), Nd = static_cast<double>(N);
    if (n >= 2) {
      b.add(idx(n), idx(n - 1), nd * (nd - 1.0) / Nd);
      b.add(idx(n), idx(n - 1), (nd - 1.0) * p.u * p.nu1());
      for (std::int64_t j = 1; j <= n - 1; ++j) b.add(idx(n), idx(j), p.u * p.nu0);
    }
    for (const auto& [m, sm] : p.selection.rates) {
      if (sm == 0.0) continue;
      for (std::int64_t j = 1; j <= m && n + j <= N; ++j) {
        bigrat w(branching_coeff(n, m, j) * falling(bigint(N - n), j), ipow(bigint(N), m));
        b.add(idx(n), idx(n + j), sm * nd * rat_to_double(w));
      }
    }
  }
  return b.finish();
}

Ctmc build_Q_Ytilde(const ModelParams& p) {
  require_ftw(p, "build_Q_Ytilde");
  std::int64_t N = p.N;
  CtmcBuilder b(count_range(0, N, false));
  for (std::int64_t k = 1; k <= N - 1; ++k) {
    double kd = static_cast<double>(k), Nd = static_cast<double>(N);
    double neutral = kd * (Nd - kd) / Nd;
    // beneficial mutations either step down or, when they would end the
    // excursion, restart it from N; deleterious mirror with 0
    b.add(k, k + 1, neutral + (Nd - kd) * p.u * p.nu1() * kd / (kd + 1.0));
    b.add(k, k - 1,
          neutral + kd * selection_pressure(p, k) +
              kd * p.u * p.nu0 * (Nd - kd) / (Nd - kd + 1.0));
    b.add(k, N, kd * p.u * p.nu0 / (Nd - kd + 1.0));
    b.add(k, 0, (Nd - kd) * p.u * p.nu1() / (kd + 1.0));
  }
  return b.finish();
}

Ctmc build_Q_siegmund(const ModelParams& p) {
  require_ftw(p, "build_Q_siegmund");
  std::int64_t N = p.N;
  CtmcBuilder b(count_range(0, N + 1, false));
  for (std::int64_t k = 1; k <= N; ++k) {
    double kd = static_cast<double>(k), Nd = static_cast<double>(N);
    b.add(k, k + 1, kd * ((Nd - kd) / Nd + p.u * p.nu0 + selection_pressure(p, k)));
    b.add(k, k - 1, (Nd - kd + 1.0) * ((kd - 1.0) / Nd + p.u * p.nu1()));
  }
  return b.finish();
}

std::size_t DescSpace::index(std::int64_t k, std::int64_t d, std::int64_t b) const {
  if (k < 0 || k > N || d < 0 || d > k || b < 0 || b > N - k)
    throw std::out_of_range("DescSpace::index: state outside Theta");
  return offset[static_cast<std::size_t>(k)] +
         static_cast<std::size_t>(d) * static_cast<std::size_t>(N - k + 1) +
         static_cast<std::size_t>(b);
}

DescSpace descendant_space(std::int64_t N) {
  DescSpace s;
  s.N = N;
  s.offset.assign(static_cast<std::size_t>(N) + 1, 0);
  for (std::int64_t k = 0; k <= N; ++k) {
    s.offset[static_cast<std::size_t>(k)] = s.states.size();
    for (std::int64_t d = 0; d <= k; ++d)
      for (std::int64_t b = 0; b <= N - k; ++b) s.states.push_back({k, d, b});
  }
  return s;
}

Ctmc build_Q_descendant(const ModelParams& p, std::int64_t cap) {
  require_ftw(p, "build_Q_descendant");
  if (p.N > cap)
    throw std::invalid_argument("build_Q_descendant: N exceeds cap " + std::to_string(cap));
  std::int64_t N = p.N;
  DescSpace sp = descendant_space(N);
  std::vector<StateLabel> labels;
  labels.reserve(sp.states.size());
  for (std::size_t i = 0; i < sp.states.size(); ++i)
    labels.push_back(StateLabel::count(static_cast<std::int64_t>(i)));
  CtmcBuilder bld(std::move(labels));
  double Nd = static_cast<double>(N);

  for (std::size_t i = 0; i < sp.states.size(); ++i) {
    auto [k, d, b] = sp.states[i];
    double ud = static_cast<double>(d);           // unfit descendants
    double un = static_cast<double>(k - d);       // unfit non-descendants
    double fd = static_cast<double>(b);           // fit descendants
    double fn = static_cast<double>(N - k - b);   // fit non-descendants
    auto add = [&](std::int64_t kk, std::int64_t dd, std::int64_t bb, double rate) {
      if (rate != 0.0) bld.add(i, sp.index(kk, dd, bb), rate);
    };

    // neutral reproduction: parent class x target class / N
    add(k, d + 1, b, ud * un / Nd);
    add(k, d - 1, b, un * ud / Nd);
    add(k, d, b + 1, fd * fn / Nd);
    add(k, d, b - 1, fn * fd / Nd);
    add(k + 1, d + 1, b - 1, ud * fd / Nd);
    add(k + 1, d + 1, b, ud * fn / Nd);
    add(k + 1, d, b - 1, un * fd / Nd);
    add(k + 1, d, b, un * fn / Nd);
    add(k - 1, d - 1, b + 1, fd * ud / Nd);
    add(k - 1, d, b + 1, fd * un / Nd);
    add(k - 1, d - 1, b, fn * ud / Nd);
    add(k - 1, d, b, fn * un / Nd);

    // selective reproduction: the realised parent is uniform on the fit class
    if (k < N) {
      double sk = selection_pressure(p, k);
      double fit = Nd - static_cast<double>(k);
      add(k - 1, d - 1, b + 1, ud * sk * fd / fit);
      add(k - 1, d - 1, b, ud * sk * fn / fit);
      add(k - 1, d, b + 1, un * sk * fd / fit);
      add(k - 1, d, b, un * sk * fn / fit);
      add(k, d, b + 1, fn * sk * fd / fit);
      add(k, d, b - 1, fd * sk * fn / fit);
    }

    // mutation
    add(k - 1, d - 1, b + 1, p.u * p.nu0 * ud);
    add(k - 1, d, b, p.u * p.nu0 * un);
    add(k + 1, d + 1, b - 1, p.u * p.nu1() * fd);
    add(k + 1, d, b, p.u * p.nu1() * fn);
  }
  return bld.finish();
}

RatMatrix build_T_rat(std::int64_t N) {
  std::size_t n = static_cast<std::size_t>(N) + 2;
  RatMatrix T(n, std::vector<bigrat>(n, bigrat(0)));
  T[0][0] = 1;
  T[n - 1][n - 1] = 1;
  for (std::int64_t j = 1; j <= N; ++j)
    for (std::int64_t k = 1; k <= N; ++k)
      T[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
          bigrat(binomial(k - 1, j - 1), binomial(N, j));
  return T;
}

RatMatrix build_T_inv_rat(std::int64_t N) {
  std::size_t n = static_cast<std::size_t>(N) + 2;
  RatMatrix Ti(n, std::vector<bigrat>(n, bigrat(0)));
  Ti[0][0] = 1;
  Ti[n - 1][n - 1] = 1;
  for (std::int64_t j = 1; j <= N; ++j)
    for (std::int64_t k = 1; k <= N; ++k) {
      bigint v = binomial(N, k) * binomial(k - 1, j - 1);
      if ((j + k) % 2 != 0) v = -v;
      Ti[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = bigrat(v);
    }
  return Ti;
}

namespace {

DenseMatrix dense_from_rat(const RatMatrix& M) {
  DenseMatrix D(M.size(), M.empty() ? 0 : M[0].size());
  for (std::size_t i = 0; i < D.rows; ++i)
    for (std::size_t j = 0; j < D.cols; ++j) D.at(i, j) = rat_to_double(M[i][j]);
  return D;
}

}  // namespace

DenseMatrix build_T(std::int64_t N) { return dense_from_rat(build_T_rat(N)); }
DenseMatrix build_T_inv(std::int64_t N) { return dense_from_rat(build_T_inv_rat(N)); }

DenseMatrix conjugate(const DenseMatrix& Q, const DenseMatrix& T, const DenseMatrix& T_inv) {
  if (Q.rows != Q.cols || T.rows != T.cols || T_inv.rows != T_inv.cols ||
      Q.rows != T.rows || Q.rows != T_inv.rows)
    throw std::invalid_argument("conjugate: dimension mismatch");
  std::size_t n = Q.rows;
  DenseMatrix QT(n, n), out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double q = Q.at(i, k);
      if (q == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) QT.at(i, j) += q * T.at(k, j);
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double t = T_inv.at(i, k);
      if (t == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += t * QT.at(k, j);
    }
  return out;
}

RatMatrix conjugate_rat(const RatMatrix& Q, const RatMatrix& T, const RatMatrix& T_inv) {
  std::size_t n = Q.size();
  if (T.size() != n || T_inv.size() != n)
    throw std::invalid_argument("conjugate_rat: dimension mismatch");
  RatMatrix QT(n, std::vector<bigrat>(n, bigrat(0))), out(n, std::vector<bigrat>(n, bigrat(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (Q[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (T[k][j] != 0) QT[i][j] += Q[i][k] * T[k][j];
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (T_inv[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (QT[k][j] != 0) out[i][j] += T_inv[i][k] * QT[k][j];
    }
  return out;
}

RatMatrix build_Q_R_rat(const ModelParams& p) {
  require_ftw(p, "build_Q_R_rat");
  std::int64_t N = p.N;
  std::size_t n = static_cast<std::size_t>(N) + 2;  // 0..N, Delta
  RatMatrix Q(n, std::vector<bigrat>(n, bigrat(0)));
  bigrat u = p.u_rat, nu0 = p.nu0_rat, nu1 = p.nu1_rat();
  for (std::int64_t r = 1; r <= N; ++r) {
    std::size_t i = static_cast<std::size_t>(r);
    bigrat total(0);
    auto add = [&](std::size_t j, const bigrat& rate) {
      Q[i][j] += rate;
      total += rate;
    };
    if (r >= 2) add(i - 1, bigrat(bigint(r) * (r - 1), bigint(N)));
    add(i - 1, bigrat(r) * u * nu1);
    add(n - 1, bigrat(r) * u * nu0);
    for (const auto& [m, sm] : p.rates_rat) {
      if (sm == 0) continue;
      for (std::int64_t j = 1; j <= m && r + j <= N; ++j) {
        bigrat w(branching_coeff(r, m, j) * falling(bigint(N - r), j), ipow(bigint(N), m));
        add(i + static_cast<std::size_t>(j), sm * bigrat(r) * w);
      }
    }
    Q[i][i] -= total;
  }
  return Q;
}

RatMatrix build_Q_siegmund_rat(const ModelParams& p) {
  require_ftw(p, "build_Q_siegmund_rat");
  std::int64_t N = p.N;
  std::size_t n = static_cast<std::size_t>(N) + 2;  // 0..N+1
  RatMatrix Q(n, std::vector<bigrat>(n, bigrat(0)));
  bigrat u = p.u_rat, nu0 = p.nu0_rat, nu1 = p.nu1_rat();
  for (std::int64_t k = 1; k <= N; ++k) {
    std::size_t i = static_cast<std::size_t>(k);
    bigrat sel(0);
    for (const auto& [m, sm] : p.rates_rat)
      sel += sm * (bigrat(1) - bigrat(ipow(bigint(k), m), ipow(bigint(N), m)));
    bigrat up = bigrat(k) * (bigrat(N - k, N) + u * nu0 + sel);
    bigrat down = bigrat(N - k + 1) * (bigrat(k - 1, N) + u * nu1);
    Q[i][i + 1] += up;
    Q[i][i - 1] += down;
    Q[i][i] -= up + down;
  }
  return Q;
}

DenseMatrix dense_from_ctmc(const Ctmc& chain) {
  std::size_t n = chain.n();
  DenseMatrix D(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    D.at(i, i) = chain.diag[i];
    for (std::size_t e = chain.row_ptr[i]; e < chain.row_ptr[i + 1]; ++e)
      D.at(i, chain.col[e]) += chain.rate[e];
  }
  return D;
}

}  // namespace moran
