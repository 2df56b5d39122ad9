#pragma once

#include <cstdint>
#include <vector>

#include "moran/params.hpp"

namespace moran {

enum class AncestralRoute { L_LAW, RECURSION, YTILDE };

struct AncestralResult {
  std::vector<double> h;  // indexed by k = 0..N
  AncestralRoute route = AncestralRoute::L_LAW;
  double r = 0.0;  // time horizon; infinity for stationary results
};

// P(ancestor unfit | k unfit now) at backward time r, from the law of the
// pruned line-count process started at 1
AncestralResult h_r_via_L(const ModelParams& p, double r);

// stationary line-count route; N <= 2000
AncestralResult h_inf_via_L(const ModelParams& p);

// tridiagonal solve of the boundary problem h(0)=0, h(N)=1; the cheap route,
// valid for any N
AncestralResult h_inf_via_recursion(const ModelParams& p);

// absorption probability of the recurrent type-frequency modification at N;
// N <= 2000
AncestralResult h_inf_via_Ytilde(const ModelParams& p);

// max_k |(1 - h_inf(k)) - tail sum representation| using the stationary
// line-count law
double tail_representation_check(const ModelParams& p);

struct Fig7Point {
  double mean_unfit = 0.0;           // stationary E[Y]/N
  double mean_unfit_ancestor = 0.0;  // stationary E[h_inf(Y)]
};

// both stationary means for one parameter point; requires u > 0
Fig7Point fig7_point(const ModelParams& p);

}  // namespace moran
