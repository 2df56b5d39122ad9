#pragma once

#include <cstdint>
#include <vector>

#include "moran/ctmc.hpp"
#include "moran/dualities.hpp"
#include "moran/params.hpp"

namespace moran {

enum class BoundaryPolicy { REFLECT_REPORT, ABSORB_REPORT };

// finite window of a countable-state generator; jumps past n_max are
// redirected to (or absorbed at) n_max and the distortion is reported by the
// operations that used the window
struct TruncatedChain {
  Ctmc chain;
  std::int64_t n_max = 0;
  BoundaryPolicy policy = BoundaryPolicy::REFLECT_REPORT;
};

// killed line-count limit on {0,...,n_max, Delta}
TruncatedChain build_Q_Rcal(const DiffusionParams& dp, std::int64_t n_max,
                            BoundaryPolicy policy = BoundaryPolicy::REFLECT_REPORT);

// pruned line-count limit on {1,...,n_max}
TruncatedChain build_Q_Lcal(const DiffusionParams& dp, std::int64_t n_max,
                            BoundaryPolicy policy = BoundaryPolicy::REFLECT_REPORT);

enum class DensityExponentForm { HARMONIC, FACTORIAL };

// n-th moment of the stationary type-frequency density, by adaptive
// quadrature after substitutions that remove both endpoint singularities;
// requires theta*nu0 > 0 and theta*nu1 > 0
double pi_Y_moment(const DiffusionParams& dp, std::int64_t n,
                   DensityExponentForm form = DensityExponentForm::HARMONIC);

struct DiffusionDualityResult {
  DualityReport report;
  std::int64_t n_max_used = 0;
  double self_consistency_gap = 0.0;  // max change when n_max is doubled
  std::vector<double> lhs;  // absorption probabilities, n = 0..n_top
  std::vector<double> rhs;  // stationary moments
};

// absorption-at-0 probabilities of the killed limit against stationary
// moments, n = 0..n_top; n_max doubles until the gap passes or the cap is hit
DiffusionDualityResult check_diffusion_duality(const DiffusionParams& dp,
                                               std::int64_t n_top = 20,
                                               std::int64_t n_max = 200);

struct HInfDiffusion {
  std::vector<double> y;
  std::vector<double> h;
  std::int64_t n_max_used = 0;
  double self_consistency_gap = 0.0;
};

// h_inf(y) = sum_n P(L = n) y^n from the stationary pruned line count
HInfDiffusion h_inf_diffusion(const DiffusionParams& dp, const std::vector<double>& y_grid,
                              std::int64_t n_max = 200);

struct ConvergenceRow {
  std::int64_t N = 0;
  double distance = 0.0;
};

// moment distance (n <= 5) between the rescaled finite model at time N*t and
// the finest listed N, started from floor(N/2)
std::vector<ConvergenceRow> convergence_diagnostic(const DiffusionParams& dp,
                                                   const std::vector<std::int64_t>& N_list,
                                                   double t);

// E[y^{R_t}] for the killed limit from R_0 = n, truncated at n_max
double diffusion_moment_dual(const DiffusionParams& dp, double y, std::int64_t n, double t,
                             std::int64_t n_max = 200);

}  // namespace moran
