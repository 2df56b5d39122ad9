#include "moran/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "moran/generators.hpp"
#include "moran/parallel.hpp"

namespace moran {

namespace {

constexpr std::int64_t kWindowCap = 3200;
constexpr double kSelfConsistencyTol = 1e-6;

void require_window(const DiffusionParams& dp, std::int64_t n_max, const char* who) {
  if (n_max < dp.max_order() + 2)
    throw std::invalid_argument(std::string(who) + ": n_max must exceed the largest order by 2");
}

}  // namespace

TruncatedChain build_Q_Rcal(const DiffusionParams& dp, std::int64_t n_max,
                            BoundaryPolicy policy) {
  require_window(dp, n_max, "build_Q_Rcal");
  std::vector<StateLabel> labels;
  for (std::int64_t n = 0; n <= n_max; ++n) labels.push_back(StateLabel::count(n));
  labels.push_back(StateLabel::cemetery());
  CtmcBuilder b(std::move(labels));
  std::size_t delta = static_cast<std::size_t>(n_max) + 1;

  std::int64_t top = policy == BoundaryPolicy::ABSORB_REPORT ? n_max - 1 : n_max;
  for (std::int64_t n = 1; n <= top; ++n) {
    std::size_t i = static_cast<std::size_t>(n);
    double nd = static_cast<double>(n);
    if (n >= 2) b.add(i, i - 1, nd * (nd - 1.0));
    if (dp.theta > 0.0) {
      b.add(i, i - 1, nd * dp.theta * dp.nu1());
      b.add(i, delta, nd * dp.theta * dp.nu0);
    }
    for (const auto& [m, sm] : dp.sigma) {
      if (sm == 0.0) continue;
      std::int64_t target = std::min(n + m, n_max);
      if (target != n) b.add(i, static_cast<std::size_t>(target), nd * sm);
    }
  }
  TruncatedChain tc;
  tc.chain = b.finish();
  tc.n_max = n_max;
  tc.policy = policy;
  return tc;
}

TruncatedChain build_Q_Lcal(const DiffusionParams& dp, std::int64_t n_max,
                            BoundaryPolicy policy) {
  require_window(dp, n_max, "build_Q_Lcal");
  std::vector<StateLabel> labels;
  for (std::int64_t n = 1; n <= n_max; ++n) labels.push_back(StateLabel::count(n));
  CtmcBuilder b(std::move(labels));
  auto idx = [](std::int64_t n) { return static_cast<std::size_t>(n - 1); };

  std::int64_t top = policy == BoundaryPolicy::ABSORB_REPORT ? n_max - 1 : n_max;
  for (std::int64_t n = 1; n <= top; ++n) {
    double nd = static_cast<double>(n);
    if (n >= 2) {
      b.add(idx(n), idx(n - 1), nd * (nd - 1.0));
      if (dp.theta > 0.0) {
        b.add(idx(n), idx(n - 1), (nd - 1.0) * dp.theta * dp.nu1());
        for (std::int64_t j = 1; j <= n - 1; ++j)
          b.add(idx(n), idx(j), dp.theta * dp.nu0);
      }
    }
    for (const auto& [m, sm] : dp.sigma) {
      if (sm == 0.0) continue;
      std::int64_t target = std::min(n + m, n_max);
      if (target != n) b.add(idx(n), idx(target), nd * sm);
    }
  }
  TruncatedChain tc;
  tc.chain = b.finish();
  tc.n_max = n_max;
  tc.policy = policy;
  return tc;
}

namespace {

double weight_exponent(const DiffusionParams& dp, double y, DensityExponentForm form) {
  double e = 0.0;
  for (const auto& [m, sm] : dp.sigma) {
    if (sm == 0.0) continue;
    double term = 0.0, pw = 1.0, fact = 1.0;
    for (std::int64_t k = 1; k <= m; ++k) {
      pw *= y;
      if (form == DensityExponentForm::HARMONIC) {
        term += pw / static_cast<double>(k);
      } else {
        fact *= static_cast<double>(k);
        term += pw / fact;
      }
    }
    e += sm * term;
  }
  return e;
}

// integral of y^(n+a-1) (1-y)^(c-1) exp(-weight) over (0,1), a = theta*nu1,
// c = theta*nu0; power substitutions make both halves smooth
double density_integral(const DiffusionParams& dp, std::int64_t n, DensityExponentForm form) {
  double a = dp.theta * dp.nu1() + static_cast<double>(n);
  double c = dp.theta * dp.nu0;
  auto smooth = [&dp, form](double y) { return std::exp(-weight_exponent(dp, y, form)); };

  using quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  // left half: y = z^(1/a) maps y^(a-1) dy to dz / a
  auto left = [&](double z) {
    double y = std::pow(z, 1.0 / a);
    return smooth(y) * std::pow(1.0 - y, c - 1.0) / a;
  };
  // right half: 1 - y = w^(1/c)
  auto right = [&](double w) {
    double y = 1.0 - std::pow(w, 1.0 / c);
    return smooth(y) * std::pow(y, a - 1.0) / c;
  };
  double lo = quad::integrate(left, 0.0, std::pow(0.5, a), 15, 1e-12);
  double hi = quad::integrate(right, 0.0, std::pow(0.5, c), 15, 1e-12);
  return lo + hi;
}

}  // namespace

double pi_Y_moment(const DiffusionParams& dp, std::int64_t n, DensityExponentForm form) {
  if (n < 0) throw std::invalid_argument("pi_Y_moment: n >= 0 required");
  if (dp.theta * dp.nu0 <= 0.0 || dp.theta * dp.nu1() <= 0.0)
    throw std::invalid_argument("pi_Y_moment: two-sided mutation required");
  if (n == 0) return 1.0;
  return density_integral(dp, n, form) / density_integral(dp, 0, form);
}

namespace {

std::vector<double> killed_absorption_head(const DiffusionParams& dp, std::int64_t n_max,
                                           std::int64_t n_top) {
  TruncatedChain tc = build_Q_Rcal(dp, n_max);
  std::vector<double> h = absorption_probs(tc.chain, StateLabel::count(0));
  h.resize(static_cast<std::size_t>(n_top) + 1);
  return h;
}

}  // namespace

DiffusionDualityResult check_diffusion_duality(const DiffusionParams& dp, std::int64_t n_top,
                                               std::int64_t n_max) {
  if (n_top < 0 || n_top >= n_max)
    throw std::invalid_argument("check_diffusion_duality: need 0 <= n_top < n_max");
  if (dp.theta * dp.nu0 <= 0.0 || dp.theta * dp.nu1() <= 0.0)
    throw std::invalid_argument("check_diffusion_duality: two-sided mutation required");

  std::vector<double> cur = killed_absorption_head(dp, n_max, n_top);
  double gap = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<double> next = killed_absorption_head(dp, 2 * n_max, n_top);
    gap = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i)
      gap = std::max(gap, std::abs(cur[i] - next[i]));
    cur = std::move(next);
    n_max *= 2;
    if (gap <= kSelfConsistencyTol || 2 * n_max > kWindowCap) break;
  }

  std::vector<double> moments(static_cast<std::size_t>(n_top) + 1);
  parallel_for(moments.size(), [&](std::size_t n) {
    moments[n] = pi_Y_moment(dp, static_cast<std::int64_t>(n));
  });

  DiffusionDualityResult out;
  out.n_max_used = n_max;
  out.self_consistency_gap = gap;
  out.report.identity = "diffusion_absorption_moment";
  out.report.N = n_max;
  out.report.params_json = dparams_to_json(dp);
  out.report.t = std::numeric_limits<double>::infinity();

  double sum = 0.0;
  for (std::size_t n = 0; n < moments.size(); ++n) {
    double r = std::abs(cur[n] - moments[n]);
    sum += r;
    if (r > out.report.max_abs_residual) {
      out.report.max_abs_residual = r;
      out.report.argmax_k = StateLabel::count(static_cast<std::int64_t>(n)).str();
      out.report.argmax_n = out.report.argmax_k;
    }
  }
  out.report.mean_abs_residual = sum / static_cast<double>(moments.size());
  out.report.details_json = std::string("{\"n_max\":") + std::to_string(n_max) +
                            ",\"self_consistency_gap\":" + format_double(gap) + "}";
  out.lhs = std::move(cur);
  out.rhs = std::move(moments);
  return out;
}

HInfDiffusion h_inf_diffusion(const DiffusionParams& dp, const std::vector<double>& y_grid,
                              std::int64_t n_max) {
  auto solve = [&dp, &y_grid](std::int64_t window) {
    TruncatedChain tc = build_Q_Lcal(dp, window);
    Dist pi = stationary(tc.chain);
    std::vector<double> h(y_grid.size(), 0.0);
    for (std::size_t g = 0; g < y_grid.size(); ++g) {
      double y = y_grid[g];
      double pw = 1.0, acc = 0.0;
      for (std::size_t i = 0; i < pi.p.size(); ++i) {
        pw *= y;  // states run 1..window in order
        acc += pi.p[i] * pw;
      }
      h[g] = acc;
    }
    return h;
  };

  HInfDiffusion out;
  out.y = y_grid;
  std::vector<double> cur = solve(n_max);
  double gap = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<double> next = solve(2 * n_max);
    gap = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i)
      gap = std::max(gap, std::abs(cur[i] - next[i]));
    cur = std::move(next);
    n_max *= 2;
    if (gap <= kSelfConsistencyTol || 2 * n_max > kWindowCap) break;
  }
  out.h = std::move(cur);
  out.n_max_used = n_max;
  out.self_consistency_gap = gap;
  return out;
}

std::vector<ConvergenceRow> convergence_diagnostic(const DiffusionParams& dp,
                                                   const std::vector<std::int64_t>& N_list,
                                                   double t) {
  if (N_list.empty()) return {};
  std::int64_t finest = *std::max_element(N_list.begin(), N_list.end());

  auto rescaled_moments = [&dp, t](std::int64_t N) {
    RateMap rates;
    for (const auto& [m, sm] : dp.sigma) rates.emplace_back(m, sm / static_cast<double>(N));
    ModelParams p = make_params(N, dp.theta / static_cast<double>(N), dp.nu0,
                                SelectionScheme::FTW, std::move(rates));
    Ctmc QY = build_Q_Y_ftw(p);
    Dist law = transient(QY, dirac(QY, StateLabel::count(N / 2)), static_cast<double>(N) * t);
    std::vector<double> m(5, 0.0);
    for (std::size_t i = 0; i < law.p.size(); ++i) {
      double y = static_cast<double>(law.states[i].value) / static_cast<double>(N);
      double pw = 1.0;
      for (std::size_t n = 0; n < m.size(); ++n) {
        pw *= y;
        m[n] += law.p[i] * pw;
      }
    }
    return m;
  };

  std::vector<double> ref = rescaled_moments(finest);
  std::vector<ConvergenceRow> rows(N_list.size());
  parallel_for(N_list.size(), [&](std::size_t i) {
    std::vector<double> m = N_list[i] == finest ? ref : rescaled_moments(N_list[i]);
    double d = 0.0;
    for (std::size_t n = 0; n < m.size(); ++n) d = std::max(d, std::abs(m[n] - ref[n]));
    rows[i] = {N_list[i], d};
  });
  return rows;
}

double diffusion_moment_dual(const DiffusionParams& dp, double y, std::int64_t n, double t,
                             std::int64_t n_max) {
  TruncatedChain tc = build_Q_Rcal(dp, n_max);
  Dist law = transient(tc.chain, dirac(tc.chain, StateLabel::count(n)), t);
  double acc = 0.0;
  for (std::size_t i = 0; i < law.p.size(); ++i)
    acc += law.p[i] * H_moment(y, law.states[i]);
  return acc;
}

}  // namespace moran
