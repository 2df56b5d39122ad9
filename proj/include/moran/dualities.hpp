#pragma once

#include <cstdint>
#include <string>

#include "moran/ctmc.hpp"
#include "moran/params.hpp"

namespace moran {

struct DualityReport {
  std::string identity;
  std::int64_t N = 0;
  std::string params_json;  // echo of the parameters the check ran on
  double t = 0.0;
  double max_abs_residual = 0.0;
  double mean_abs_residual = 0.0;
  std::string argmax_k;  // state labels at the worst pair
  std::string argmax_n;
  std::string details_json;  // optional per-identity extras

  std::string to_json() const;
};

// falling-factorial ratio k^(n) / N^(n), with value 0 at the cemetery and 1 at
// n = 0; evaluated as a running product so k < n gives an exact 0
double H_F(const StateLabel& k, const StateLabel& n, std::int64_t N);

// level-crossing indicator 1{x >= x_star}
double H_S(const StateLabel& x, const StateLabel& x_star);

// y^n with y^Delta = 0, y^0 = 1
double H_moment(double y, const StateLabel& n);

// E[Y_t^(n)/N^(n) | Y_0=k] vs E[k^(R_t)/N^(R_t) | R_0=n] on the full grid
DualityReport check_factorial_duality(const ModelParams& p, double t, double tol = 1e-12);

// E[Ytilde_t^(n)/N^(n) | k] vs E[k^(L_t)/N^(L_t) | n]; also pins the n=1
// column to E_k[Ytilde_t]/N
DualityReport check_ytilde_L_duality(const ModelParams& p, double t, double tol = 1e-12);

// P(Y_t >= x* | Y_0 = x) vs P(x >= S_t | S_0 = x*) over [N]_0 x [N+1]_0
DualityReport check_siegmund_duality(const ModelParams& p, double t, double tol = 1e-12);

// exact rational check of T^-1 Q_R T = Q_siegmund (Delta identified with N+1)
// and of the inverse direction; N <= 25
DualityReport check_conjugation(const ModelParams& p);

// E[D_t + B_t | start (k,k,0)] vs E[Ytilde_t | k] for every k; N <= 20
DualityReport check_descendant_equality(const ModelParams& p, double t, double tol = 1e-12);

}  // namespace moran
