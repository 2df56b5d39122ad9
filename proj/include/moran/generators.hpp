#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "moran/combinatorics.hpp"
#include "moran/ctmc.hpp"
#include "moran/params.hpp"

namespace moran {

struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

using RatMatrix = std::vector<std::vector<bigrat>>;

// per-individual selective pressure s(k) = sum_m s_m (1 - (k/N)^m)
double selection_pressure(const ModelParams& p, std::int64_t k);

// unfit-count chain on [N]_0 (FTW rates)
Ctmc build_Q_Y_ftw(const ModelParams& p);
// unfit-count chain on [N]_0 (DOM rates, selective death via checking groups)
Ctmc build_Q_Y_dom(const ModelParams& p);
// killed line counter on {0} u [N] u {Delta}
Ctmc build_Q_R(const ModelParams& p);
// pruned lookdown line counter on [N]
Ctmc build_Q_L(const ModelParams& p);
// unfit-count chain conditioned paths representation on [N]_0, 0 and N absorbing
Ctmc build_Q_Ytilde(const ModelParams& p);
// level-crossing dual of the unfit-count chain on [N+1]_0 (N+1 plays Delta)
Ctmc build_Q_siegmund(const ModelParams& p);

// (k, d, b) state enumeration, lexicographic; d <= k, b <= N-k
struct DescSpace {
  std::int64_t N = 0;
  std::vector<std::array<std::int64_t, 3>> states;
  std::vector<std::size_t> offset;  // offset[k] = first index with that k

  std::size_t index(std::int64_t k, std::int64_t d, std::int64_t b) const;
};
DescSpace descendant_space(std::int64_t N);

// joint chain of unfit count and descendant counts of a tagged set; state
// labels are linear indices into descendant_space(N).states
Ctmc build_Q_descendant(const ModelParams& p, std::int64_t cap = 20);

// law-of-maximum transformation on [N]_{0,Delta} (index N+1 = Delta) and its
// binomial inverse; double entries are rounded from exact rationals
DenseMatrix build_T(std::int64_t N);
DenseMatrix build_T_inv(std::int64_t N);
RatMatrix build_T_rat(std::int64_t N);
RatMatrix build_T_inv_rat(std::int64_t N);

// returns T_inv * Q * T (argument order matches the identity being checked;
// pass (Q, T_inv, T) to apply the inverse transformation)
DenseMatrix conjugate(const DenseMatrix& Q, const DenseMatrix& T, const DenseMatrix& T_inv);
RatMatrix conjugate_rat(const RatMatrix& Q, const RatMatrix& T, const RatMatrix& T_inv);

// exact rational builds (states ordered 0..N, Delta last) for the exact
// conjugation identity
RatMatrix build_Q_R_rat(const ModelParams& p);
RatMatrix build_Q_siegmund_rat(const ModelParams& p);

DenseMatrix dense_from_ctmc(const Ctmc& chain);

}  // namespace moran
