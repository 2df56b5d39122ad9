#include "moran/ancestral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "moran/ctmc.hpp"
#include "moran/dualities.hpp"
#include "moran/generators.hpp"

namespace moran {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kChainRouteCap = 2000;

void require_small(const ModelParams& p, const char* who) {
  if (p.N > kChainRouteCap)
    throw std::invalid_argument(std::string(who) + ": N <= " +
                                std::to_string(kChainRouteCap) + " required");
}

// h(k) = sum_n P(L = n) k^(n)/N^(n), plus the exactness/monotonicity checks
// every ancestral-type curve must satisfy
std::vector<double> fold_line_law(const Dist& law, std::int64_t N) {
  std::vector<double> h(static_cast<std::size_t>(N) + 1, 0.0);
  for (std::int64_t k = 0; k <= N; ++k) {
    double v = 0.0;
    for (std::size_t i = 0; i < law.states.size(); ++i)
      v += law.p[i] * H_F(StateLabel::count(k), law.states[i], N);
    h[static_cast<std::size_t>(k)] = v;
  }
  return h;
}

void polish(std::vector<double>& h, const char* who) {
  const double slack = 1e-12;
  for (double& v : h) {
    if (v < -slack || v > 1.0 + slack)
      throw std::runtime_error(std::string(who) + ": value outside [0,1]");
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
  }
  for (std::size_t k = 1; k < h.size(); ++k)
    if (h[k] < h[k - 1] - slack)
      throw std::runtime_error(std::string(who) + ": not monotone in k");
}

}  // namespace

AncestralResult h_r_via_L(const ModelParams& p, double r) {
  ModelParams q = p.as_ftw();
  require_small(q, "h_r_via_L");
  Ctmc QL = build_Q_L(q);
  Dist law = transient(QL, dirac(QL, StateLabel::count(1)), r);
  AncestralResult res;
  res.h = fold_line_law(law, q.N);
  polish(res.h, "h_r_via_L");
  res.route = AncestralRoute::L_LAW;
  res.r = r;
  return res;
}

AncestralResult h_inf_via_L(const ModelParams& p) {
  ModelParams q = p.as_ftw();
  require_small(q, "h_inf_via_L");
  if (q.u <= 0.0)
    throw std::invalid_argument("h_inf_via_L: u > 0 required for a stationary line count");
  Ctmc QL = build_Q_L(q);
  Dist law = stationary(QL);
  AncestralResult res;
  res.h = fold_line_law(law, q.N);
  polish(res.h, "h_inf_via_L");
  res.route = AncestralRoute::L_LAW;
  res.r = kInf;
  return res;
}

AncestralResult h_inf_via_recursion(const ModelParams& p) {
  ModelParams q = p.as_ftw();
  if (q.u <= 0.0)
    throw std::invalid_argument("h_inf_via_recursion: u > 0 required");
  std::int64_t N = q.N;
  double u = q.u, nu0 = q.nu0, nu1 = q.nu1();
  std::size_t n = static_cast<std::size_t>(N) - 1;  // unknowns h(1)..h(N-1)

  AncestralResult res;
  res.route = AncestralRoute::RECURSION;
  res.r = kInf;
  if (N == 1) {
    res.h = {0.0, 1.0};
    return res;
  }

  // first-step relation of the recurrent modification, divided through by k:
  //   b_k h(k) = a_k h(k-1) + c_k h(k+1) + d_k
  std::vector<double> a(n), b(n), c(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t k = static_cast<std::int64_t>(i) + 1;
    double kd = static_cast<double>(k), Nd = static_cast<double>(N);
    double drift = 1.0 - kd / Nd;
    double sk = selection_pressure(q, k);
    a[i] = drift + sk + u * nu0 * (Nd - kd) / (Nd - kd + 1.0);
    c[i] = drift + u * nu1 * (Nd - kd) / (kd + 1.0);
    d[i] = u * nu0 / (Nd - kd + 1.0);
    b[i] = 2.0 * drift + u * nu1 * (Nd - kd) / kd + u * nu0 + sk;
  }

  // Thomas elimination on the tridiagonal system; h(0)=0 drops the first
  // sub-term, h(N)=1 feeds the last rhs
  std::vector<double> rhs(d);
  rhs[n - 1] += c[n - 1];
  std::vector<double> cp(n), dp(n);
  cp[0] = c[0] / b[0];
  dp[0] = rhs[0] / b[0];
  for (std::size_t i = 1; i < n; ++i) {
    double denom = b[i] - a[i] * cp[i - 1];
    cp[i] = c[i] / denom;
    dp[i] = (rhs[i] + a[i] * dp[i - 1]) / denom;
  }
  std::vector<double> h(n);
  h[n - 1] = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) h[i] = dp[i] + cp[i] * h[i + 1];

  res.h.assign(static_cast<std::size_t>(N) + 1, 0.0);
  res.h[static_cast<std::size_t>(N)] = 1.0;
  for (std::size_t i = 0; i < n; ++i) res.h[i + 1] = h[i];

  // plug-back residual in the infinity norm
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double left = i == 0 ? 0.0 : res.h[i];
    double r = b[i] * res.h[i + 1] - a[i] * left - c[i] * res.h[i + 2] - d[i];
    worst = std::max(worst, std::abs(r));
  }
  if (worst > 1e-9)
    throw std::runtime_error("h_inf_via_recursion: residual " + format_double(worst));

  polish(res.h, "h_inf_via_recursion");
  return res;
}

AncestralResult h_inf_via_Ytilde(const ModelParams& p) {
  ModelParams q = p.as_ftw();
  require_small(q, "h_inf_via_Ytilde");
  if (q.u <= 0.0)
    throw std::invalid_argument("h_inf_via_Ytilde: u > 0 required");
  Ctmc QYt = build_Q_Ytilde(q);
  AncestralResult res;
  res.h = absorption_probs(QYt, StateLabel::count(q.N));
  polish(res.h, "h_inf_via_Ytilde");
  res.route = AncestralRoute::YTILDE;
  res.r = kInf;
  return res;
}

double tail_representation_check(const ModelParams& p) {
  ModelParams q = p.as_ftw();
  require_small(q, "tail_representation_check");
  if (q.u <= 0.0)
    throw std::invalid_argument("tail_representation_check: u > 0 required");
  std::int64_t N = q.N;
  Ctmc QL = build_Q_L(q);
  Dist law = stationary(QL);

  // tail probabilities P(L > n), n = 0..N-1; state i holds count i+1
  std::vector<double> tail(static_cast<std::size_t>(N), 0.0);
  for (std::size_t n = 0; n < tail.size(); ++n)
    for (std::size_t i = n; i < law.p.size(); ++i) tail[n] += law.p[i];

  std::vector<double> h = fold_line_law(law, N);
  double worst = 0.0;
  for (std::int64_t k = 0; k <= N; ++k) {
    double sum = 0.0, ratio = 1.0;
    for (std::int64_t n = 0; n < N; ++n) {
      // ratio = k^(n) / (N-1)^(n)
      if (n > 0) {
        ratio *= static_cast<double>(k - (n - 1)) / static_cast<double>(N - n);
        if (ratio < 0.0) ratio = 0.0;
      }
      sum += tail[static_cast<std::size_t>(n)] * ratio;
      if (ratio == 0.0) break;
    }
    double lhs = 1.0 - h[static_cast<std::size_t>(k)];
    double rhs = (static_cast<double>(N - k) / static_cast<double>(N)) * sum;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

Fig7Point fig7_point(const ModelParams& p) {
  ModelParams q = p.as_ftw();
  if (q.u <= 0.0) throw std::invalid_argument("fig7_point: u > 0 required");
  Ctmc QY = build_Q_Y_ftw(q);
  Dist pi = stationary(QY);
  AncestralResult anc = h_inf_via_recursion(q);
  Fig7Point out;
  for (std::size_t i = 0; i < pi.p.size(); ++i) {
    double k = static_cast<double>(pi.states[i].value);
    out.mean_unfit += pi.p[i] * k / static_cast<double>(q.N);
    out.mean_unfit_ancestor += pi.p[i] * anc.h[static_cast<std::size_t>(pi.states[i].value)];
  }
  return out;
}

}  // namespace moran
