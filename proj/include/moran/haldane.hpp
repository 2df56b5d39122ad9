#pragma once

#include <cstdint>
#include <vector>

namespace moran {

// fixation probability of a single fit individual under mutation-free
// single-order selection s = sigma / N^alpha, evaluated by the stable
// product recurrence
double fixation_prob_exact(std::int64_t N, double sigma, std::int64_t m, double alpha);

// log-domain and plain-product evaluations of the same quantity, kept as
// independent cross-checks (the plain form underflows for large N)
double fixation_prob_logsum(std::int64_t N, double sigma, std::int64_t m, double alpha);
double fixation_prob_naive(std::int64_t N, double sigma, std::int64_t m, double alpha);

struct HaldaneRow {
  std::int64_t N = 0;
  double p_fix = 0.0;
  double prediction = 0.0;  // m * sigma / N^alpha
  double ratio = 0.0;
};

std::vector<HaldaneRow> haldane_scan(double sigma, std::int64_t m, double alpha,
                                     const std::vector<std::int64_t>& N_list);

// mean stationary line count of the killed process without mutation,
// via N * p_fix
double expected_R_inf(std::int64_t N, double sigma, std::int64_t m, double alpha);

// the same mean from the stationary law on {1..N}; N <= 100
double expected_R_inf_direct(std::int64_t N, double sigma, std::int64_t m, double alpha);

// full fixation curve k -> P(fixation of the unfit type | k unfit) with u=0,
// from the same q-products
std::vector<double> fixation_curve(std::int64_t N, double sigma, std::int64_t m, double alpha);

}  // namespace moran
