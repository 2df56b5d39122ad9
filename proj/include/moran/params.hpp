#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "moran/rational.hpp"

namespace moran {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SelectionScheme { FTW, DOM };

// sparse map order -> rate, kept sorted by order with distinct keys
using RateMap = std::vector<std::pair<std::int64_t, double>>;
using RateMapRat = std::vector<std::pair<std::int64_t, bigrat>>;

struct SelectionSpec {
  SelectionScheme scheme = SelectionScheme::FTW;
  RateMap rates;
};

struct ModelParams {
  std::int64_t N = 0;
  double u = 0.0;
  double nu0 = 0.0;
  SelectionSpec selection;

  // Exact mirrors of u, nu0 and the rates; equal to the binary64 fields when
  // the input was numeric, and to the literal fraction when the input was a
  // "p/q" string. Used by the rational generator builders.
  bigrat u_rat;
  bigrat nu0_rat;
  RateMapRat rates_rat;

  double nu1() const { return 1.0 - nu0; }
  bigrat nu1_rat() const { return bigrat(1) - nu0_rat; }

  // selection rates converted to the FTW parameterisation (exact differencing
  // on the rational mirrors); identity for FTW inputs
  ModelParams as_ftw() const;
};

// Returns params unchanged when every invariant holds, throws ValidationError
// otherwise (zero effective branching rate, DOM monotonicity violations,
// nu0 outside (0,1), negative rates, bad orders).
ModelParams validate(ModelParams p);

// s_m = shat_m - shat_{m+1}; input's dense sequence must be non-increasing
RateMap dom_to_ftw(const RateMap& dom);

// shat_m = sum_{n >= m} s_n; exact algebraic inverse of dom_to_ftw
RateMap ftw_to_dom(const RateMap& ftw);

// b = sum_m m s_m, always computed on the FTW form (DOM converted internally)
double effective_branching_rate(const SelectionSpec& spec);

// convenience constructor: fills the rational mirrors from the doubles
ModelParams make_params(std::int64_t N, double u, double nu0,
                        SelectionScheme scheme, RateMap rates);

// JSON schema: {"N": int, "u": num|"p/q", "nu0": num|"p/q",
//               "selection": {"scheme": "ftw"|"dom", "rates": [[m, rate], ...]}}
ModelParams params_from_json(const std::string& text);

// compact JSON echo of the binary64 fields, suitable for report embedding
std::string params_to_json(const ModelParams& p);

struct DiffusionParams {
  double theta = 0.0;
  double nu0 = 0.0;
  std::vector<std::pair<std::int64_t, double>> sigma;

  double nu1() const { return 1.0 - nu0; }
  double total_sigma() const;
  std::int64_t max_order() const;
};

DiffusionParams validate(DiffusionParams p);

// JSON schema: {"theta": num, "nu0": num, "sigma": [[m, rate], ...]}
DiffusionParams dparams_from_json(const std::string& text);

std::string dparams_to_json(const DiffusionParams& p);

}  // namespace moran
