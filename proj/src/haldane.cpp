#include "moran/haldane.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "moran/ctmc.hpp"
#include "moran/generators.hpp"
#include "moran/params.hpp"

namespace moran {

namespace {

void check_args(std::int64_t N, double sigma, std::int64_t m, const char* who) {
  if (N < 1) throw std::invalid_argument(std::string(who) + ": N >= 1 required");
  if (m < 1) throw std::invalid_argument(std::string(who) + ": m >= 1 required");
  if (!(sigma > 0.0)) throw std::invalid_argument(std::string(who) + ": sigma > 0 required");
}

// q_k = lambda_k / mu_k of the mutation-free frequency walk; the geometric
// factor keeps the expression stable where 1 - (k/N)^m cancels
double q_ratio(std::int64_t k, std::int64_t N, double s, std::int64_t m) {
  double r = static_cast<double>(k) / static_cast<double>(N);
  double geom = 0.0, pw = 1.0;
  for (std::int64_t i = 0; i < m; ++i) {
    geom += pw;
    pw *= r;
  }
  return 1.0 / (1.0 + s * geom);
}

}  // namespace

double fixation_prob_exact(std::int64_t N, double sigma, std::int64_t m, double alpha) {
  check_args(N, sigma, m, "fixation_prob_exact");
  double s = sigma * std::pow(static_cast<double>(N), -alpha);
  double S = 1.0;
  for (std::int64_t l = 1; l <= N - 1; ++l) S = 1.0 + q_ratio(l, N, s, m) * S;
  return 1.0 / S;
}

double fixation_prob_logsum(std::int64_t N, double sigma, std::int64_t m, double alpha) {
  check_args(N, sigma, m, "fixation_prob_logsum");
  double s = sigma * std::pow(static_cast<double>(N), -alpha);
  // log-sum-exp over suffix products, streamed from the top down
  double tail = 0.0;  // log prod_{k=l}^{N-1} q_k, entering with l = N
  double mx = 0.0, acc = 1.0;  // running LSE of the terms seen so far
  for (std::int64_t l = N - 1; l >= 1; --l) {
    tail += std::log(q_ratio(l, N, s, m));
    if (tail > mx) {
      acc = acc * std::exp(mx - tail) + 1.0;
      mx = tail;
    } else {
      acc += std::exp(tail - mx);
    }
  }
  return std::exp(-(mx + std::log(acc)));
}

double fixation_prob_naive(std::int64_t N, double sigma, std::int64_t m, double alpha) {
  check_args(N, sigma, m, "fixation_prob_naive");
  double s = sigma * std::pow(static_cast<double>(N), -alpha);
  double S = 0.0, prod = 1.0;
  for (std::int64_t l = N; l >= 1; --l) {
    S += prod;  // prod = prod_{k=l}^{N-1} q_k
    if (l > 1) prod *= q_ratio(l - 1, N, s, m);
  }
  return 1.0 / S;
}

std::vector<HaldaneRow> haldane_scan(double sigma, std::int64_t m, double alpha,
                                     const std::vector<std::int64_t>& N_list) {
  std::vector<HaldaneRow> rows;
  rows.reserve(N_list.size());
  for (std::int64_t N : N_list) {
    HaldaneRow row;
    row.N = N;
    row.p_fix = fixation_prob_exact(N, sigma, m, alpha);
    row.prediction = static_cast<double>(m) * sigma * std::pow(static_cast<double>(N), -alpha);
    row.ratio = row.p_fix / row.prediction;
    rows.push_back(row);
  }
  return rows;
}

double expected_R_inf(std::int64_t N, double sigma, std::int64_t m, double alpha) {
  return static_cast<double>(N) * fixation_prob_exact(N, sigma, m, alpha);
}

double expected_R_inf_direct(std::int64_t N, double sigma, std::int64_t m, double alpha) {
  check_args(N, sigma, m, "expected_R_inf_direct");
  if (N > 100)
    throw std::invalid_argument("expected_R_inf_direct: N <= 100 required");
  double s = sigma * std::pow(static_cast<double>(N), -alpha);
  // nu0 is immaterial at u = 0
  ModelParams p = make_params(N, 0.0, 0.5, SelectionScheme::FTW, {{m, s}});
  Ctmc QR = build_Q_R(p);
  Dist pi = stationary(QR, StateLabel::count(1));
  double e = 0.0;
  for (std::size_t i = 0; i < pi.p.size(); ++i) {
    if (pi.states[i].is_cemetery()) continue;
    e += pi.p[i] * static_cast<double>(pi.states[i].value);
  }
  return e;
}

std::vector<double> fixation_curve(std::int64_t N, double sigma, std::int64_t m, double alpha) {
  check_args(N, sigma, m, "fixation_curve");
  double s = sigma * std::pow(static_cast<double>(N), -alpha);
  // h(k) = P(unfit type fixes | k unfit), h(0)=0, h(N)=1; increments carry a
  // factor 1/q each step, summed in the log domain
  std::vector<double> lse(static_cast<std::size_t>(N) + 1, 0.0);  // LSE of logs rho_0..rho_{j-1}
  double lr = 0.0;  // log rho_j
  double mx = 0.0, acc = 0.0;
  for (std::int64_t j = 0; j < N; ++j) {
    // fold rho_j = prod_{i<=j} (1/q_i) into the running prefix sum
    if (j > 0) lr -= std::log(q_ratio(j, N, s, m));
    if (acc == 0.0) {
      mx = lr;
      acc = 1.0;
    } else if (lr > mx) {
      acc = acc * std::exp(mx - lr) + 1.0;
      mx = lr;
    } else {
      acc += std::exp(lr - mx);
    }
    lse[static_cast<std::size_t>(j) + 1] = mx + std::log(acc);
  }
  std::vector<double> h(static_cast<std::size_t>(N) + 1, 0.0);
  for (std::int64_t k = 1; k <= N; ++k)
    h[static_cast<std::size_t>(k)] = std::exp(lse[static_cast<std::size_t>(k)] - lse[static_cast<std::size_t>(N)]);
  return h;
}

}  // namespace moran
