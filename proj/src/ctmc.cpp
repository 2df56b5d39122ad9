#include "moran/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace moran {

std::string StateLabel::str() const {
  if (kind == Kind::Cemetery) return "DELTA";
  return std::to_string(value);
}

std::string format_double(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::size_t Ctmc::index_of(const StateLabel& s) const {
  auto it = lookup_.find(s);
  if (it == lookup_.end()) throw std::out_of_range("state not in chain: " + s.str());
  return it->second;
}

std::optional<std::size_t> Ctmc::find(const StateLabel& s) const {
  auto it = lookup_.find(s);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

double Ctmc::max_abs_row_sum() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n(); ++i) {
    long double s = diag[i];
    for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) s += rate[e];
    worst = std::max(worst, std::fabs(static_cast<double>(s)));
  }
  return worst;
}

CtmcBuilder::CtmcBuilder(std::vector<StateLabel> states)
    : states_(std::move(states)), rows_(states_.size()) {}

void CtmcBuilder::add(std::size_t from, std::size_t to, double r) {
  if (from >= states_.size() || to >= states_.size())
    throw std::out_of_range("CtmcBuilder::add: index out of range");
  if (from == to) throw std::invalid_argument("CtmcBuilder::add: diagonal is derived");
  if (r < 0.0) throw std::invalid_argument("CtmcBuilder::add: negative rate");
  if (r == 0.0) return;
  rows_[from][static_cast<std::uint32_t>(to)] += r;
}

Ctmc CtmcBuilder::finish() {
  Ctmc c;
  c.states = std::move(states_);
  std::size_t n = c.states.size();
  c.row_ptr.assign(n + 1, 0);
  c.diag.assign(n, 0.0);
  std::size_t nnz = 0;
  for (const auto& row : rows_) nnz += row.size();
  c.col.reserve(nnz);
  c.rate.reserve(nnz);
  for (std::size_t i = 0; i < n; ++i) {
    long double out = 0.0L;  // extended precision keeps row sums at one ulp
    for (const auto& [j, r] : rows_[i]) {
      c.col.push_back(j);
      c.rate.push_back(r);
      out += r;
    }
    c.diag[i] = -static_cast<double>(out);
    c.row_ptr[i + 1] = c.col.size();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!c.lookup_.emplace(c.states[i], i).second)
      throw std::invalid_argument("duplicate state label in chain");
  }
  return c;
}

Dist dirac(const Ctmc& chain, const StateLabel& x0) {
  Dist d;
  d.states = chain.states;
  d.p.assign(chain.n(), 0.0);
  d.p[chain.index_of(x0)] = 1.0;
  return d;
}

Dist make_dist(const Ctmc& chain, std::vector<double> p) {
  if (p.size() != chain.n()) throw std::invalid_argument("make_dist: length mismatch");
  double sum = 0.0;
  for (double& x : p) {
    if (x < -1e-14) throw std::runtime_error("make_dist: negative probability beyond roundoff");
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (std::fabs(sum - 1.0) > 1e-10)
    throw std::runtime_error("make_dist: mass " + format_double(sum) + " not within 1e-10 of 1");
  Dist d;
  d.states = chain.states;
  d.p = std::move(p);
  return d;
}

namespace {

// Tarjan strongly connected components, iterative. Component ids are assigned
// in reverse topological order of the condensation.
std::vector<int> scc_ids(const Ctmc& c, int& ncomp) {
  std::size_t n = c.n();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kNone), low(n, 0), stack;
  std::vector<bool> onstack(n, false);
  std::vector<int> comp(n, -1);
  std::size_t counter = 0;
  ncomp = 0;

  struct Frame {
    std::size_t v;
    std::size_t edge;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.push_back({root, c.row_ptr[root]});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    onstack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      std::size_t v = f.v;
      if (f.edge < c.row_ptr[v + 1]) {
        std::size_t w = c.col[f.edge];
        ++f.edge;
        if (index[w] == kNone) {
          call.push_back({w, c.row_ptr[w]});
          index[w] = low[w] = counter++;
          stack.push_back(w);
          onstack[w] = true;
        } else if (onstack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      } else {
        if (low[v] == index[v]) {
          while (true) {
            std::size_t w = stack.back();
            stack.pop_back();
            onstack[w] = false;
            comp[w] = ncomp;
            if (w == v) break;
          }
          ++ncomp;
        }
        call.pop_back();
        if (!call.empty()) {
          std::size_t parent = call.back().v;
          low[parent] = std::min(low[parent], low[v]);
        }
      }
    }
  }
  return comp;
}

}  // namespace

std::vector<std::vector<std::size_t>> closed_classes(const Ctmc& chain) {
  int ncomp = 0;
  std::vector<int> comp = scc_ids(chain, ncomp);
  std::vector<bool> open(static_cast<std::size_t>(ncomp), false);
  for (std::size_t i = 0; i < chain.n(); ++i) {
    for (std::size_t e = chain.row_ptr[i]; e < chain.row_ptr[i + 1]; ++e) {
      if (comp[chain.col[e]] != comp[i]) open[static_cast<std::size_t>(comp[i])] = true;
    }
  }
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(ncomp));
  for (std::size_t i = 0; i < chain.n(); ++i)
    out[static_cast<std::size_t>(comp[i])].push_back(i);
  std::vector<std::vector<std::size_t>> closed;
  for (std::size_t k = 0; k < out.size(); ++k)
    if (!open[k]) closed.push_back(std::move(out[k]));
  // deterministic order: by smallest member
  std::sort(closed.begin(), closed.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return closed;
}

namespace {

// pi restricted to the (sorted) class; caller embeds into the full space
std::vector<double> stationary_on_class(const Ctmc& chain,
                                        const std::vector<std::size_t>& cls) {
  std::size_t k = cls.size();
  std::vector<std::ptrdiff_t> pos(chain.n(), -1);
  for (std::size_t i = 0; i < k; ++i) pos[cls[i]] = static_cast<std::ptrdiff_t>(i);

  // birth-death detection within the class
  bool bd = true;
  for (std::size_t i = 0; i < k && bd; ++i) {
    std::size_t v = cls[i];
    for (std::size_t e = chain.row_ptr[v]; e < chain.row_ptr[v + 1]; ++e) {
      std::ptrdiff_t pj = pos[chain.col[e]];
      if (pj < 0 || std::abs(pj - static_cast<std::ptrdiff_t>(i)) != 1) {
        bd = false;
        break;
      }
    }
  }

  std::vector<double> pi(k, 0.0);
  if (bd && k >= 2) {
    // detailed balance: pi_i / pi_{i-1} = lambda_{i-1} / mu_i, in log domain
    std::vector<double> up(k, 0.0), down(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t v = cls[i];
      for (std::size_t e = chain.row_ptr[v]; e < chain.row_ptr[v + 1]; ++e) {
        std::ptrdiff_t pj = pos[chain.col[e]];
        if (pj == static_cast<std::ptrdiff_t>(i) + 1) up[i] += chain.rate[e];
        if (pj == static_cast<std::ptrdiff_t>(i) - 1) down[i] += chain.rate[e];
      }
    }
    std::vector<double> logpi(k, 0.0);
    for (std::size_t i = 1; i < k; ++i)
      logpi[i] = logpi[i - 1] + std::log(up[i - 1]) - std::log(down[i]);
    double mx = *std::max_element(logpi.begin(), logpi.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      pi[i] = std::exp(logpi[i] - mx);
      sum += pi[i];
    }
    for (double& x : pi) x /= sum;
    return pi;
  }

  // general route: solve Q^T x = 0 with the normalisation row replacing the last
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t v = cls[i];
    if (i + 1 < k && chain.diag[v] != 0.0)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), chain.diag[v]);
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t v = cls[i];
    for (std::size_t e = chain.row_ptr[v]; e < chain.row_ptr[v + 1]; ++e) {
      std::ptrdiff_t pj = pos[chain.col[e]];
      if (pj < 0) throw std::logic_error("closed class has an outgoing edge");
      if (static_cast<std::size_t>(pj) + 1 < k)
        trip.emplace_back(static_cast<int>(pj), static_cast<int>(i), chain.rate[e]);
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    trip.emplace_back(static_cast<int>(k - 1), static_cast<int>(i), 1.0);

  Eigen::SparseMatrix<double> A(static_cast<int>(k), static_cast<int>(k));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary: singular solve");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<int>(k));
  b[static_cast<int>(k - 1)] = 1.0;
  Eigen::VectorXd x = lu.solve(b);
  double sum = x.sum();
  if (!(std::fabs(sum) > 0)) throw std::runtime_error("stationary: degenerate solution");
  for (std::size_t i = 0; i < k; ++i) pi[i] = x[static_cast<int>(i)] / sum;
  return pi;
}

}  // namespace

Dist stationary(const Ctmc& chain, std::optional<StateLabel> anchor) {
  auto classes = closed_classes(chain);
  const std::vector<std::size_t>* cls = nullptr;
  if (anchor) {
    std::size_t a = chain.index_of(*anchor);
    for (const auto& c : classes)
      if (std::binary_search(c.begin(), c.end(), a)) cls = &c;
    if (!cls)
      throw std::runtime_error("stationary: anchor state " + anchor->str() +
                               " is not in a closed class");
  } else if (classes.size() == 1) {
    cls = &classes[0];
  } else {
    throw std::runtime_error("stationary: " + std::to_string(classes.size()) +
                             " closed classes; supply an anchor");
  }

  std::vector<double> pi_full(chain.n(), 0.0);
  if (cls->size() == 1) {
    pi_full[cls->front()] = 1.0;
  } else {
    std::vector<double> pi = stationary_on_class(chain, *cls);
    for (std::size_t i = 0; i < cls->size(); ++i) pi_full[(*cls)[i]] = pi[i];
  }

  // residual check over the full chain (mass outside the class is zero and
  // closed classes have no outgoing flow)
  std::vector<double> r(chain.n(), 0.0);
  for (std::size_t i = 0; i < chain.n(); ++i) {
    if (pi_full[i] == 0.0) continue;
    r[i] += pi_full[i] * chain.diag[i];
    for (std::size_t e = chain.row_ptr[i]; e < chain.row_ptr[i + 1]; ++e)
      r[chain.col[e]] += pi_full[i] * chain.rate[e];
  }
  double worst = 0.0;
  for (double x : r) worst = std::max(worst, std::fabs(x));
  if (worst > 1e-10)
    throw std::runtime_error("stationary: residual " + format_double(worst) + " above 1e-10");
  return make_dist(chain, std::move(pi_full));
}

std::vector<double> absorption_probs(const Ctmc& chain, const StateLabel& target) {
  std::size_t tgt = chain.index_of(target);
  if (chain.diag[tgt] != 0.0) throw std::invalid_argument("absorption target is not absorbing");
  for (const auto& c : closed_classes(chain))
    if (c.size() > 1)
      throw std::runtime_error("absorption_probs: non-singleton closed class present");

  std::size_t n = chain.n();
  std::vector<std::ptrdiff_t> pos(n, -1);
  std::vector<std::size_t> transient_states;
  for (std::size_t i = 0; i < n; ++i) {
    if (chain.diag[i] != 0.0) {
      pos[i] = static_cast<std::ptrdiff_t>(transient_states.size());
      transient_states.push_back(i);
    }
  }
  std::vector<double> h(n, 0.0);
  h[tgt] = 1.0;
  std::size_t k = transient_states.size();
  if (k == 0) return h;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<int>(k));
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t v = transient_states[i];
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), chain.diag[v]);
    for (std::size_t e = chain.row_ptr[v]; e < chain.row_ptr[v + 1]; ++e) {
      std::size_t w = chain.col[e];
      if (w == tgt) {
        b[static_cast<int>(i)] -= chain.rate[e];
      } else if (pos[w] >= 0) {
        trip.emplace_back(static_cast<int>(i), static_cast<int>(pos[w]), chain.rate[e]);
      }
    }
  }
  Eigen::SparseMatrix<double> A(static_cast<int>(k), static_cast<int>(k));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("absorption_probs: singular transient block");
  Eigen::VectorXd x = lu.solve(b);

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(chain.diag[i]));
  Eigen::VectorXd resid = A * x - b;
  double worst = resid.cwiseAbs().maxCoeff();
  if (worst > 1e-9 * (1.0 + scale))
    throw std::runtime_error("absorption_probs: solve residual too large");

  for (std::size_t i = 0; i < k; ++i) {
    double v = x[static_cast<int>(i)];
    if (v < 0.0) {
      if (v < -1e-12) throw std::runtime_error("absorption_probs: probability below 0");
      v = 0.0;
    }
    if (v > 1.0) {
      if (v > 1.0 + 1e-12) throw std::runtime_error("absorption_probs: probability above 1");
      v = 1.0;
    }
    h[transient_states[i]] = v;
  }
  return h;
}

namespace {

// one uniformization window: v <- v exp(Q dt), discarding < tol of mass
void uniformization_step(const Ctmc& chain, std::vector<double>& v, double lambda,
                         double dt, double tol) {
  double a = lambda * dt;
  std::size_t n = chain.n();
  std::vector<double> vk = v;
  std::vector<double> w(n), tmp(n);
  double pk = std::exp(-a);
  double cum = pk;
  for (std::size_t i = 0; i < n; ++i) w[i] = pk * v[i];
  std::size_t kmax = static_cast<std::size_t>(a + 40.0 * std::sqrt(a + 1.0) + 60.0);
  for (std::size_t k = 1; k <= kmax && (1.0 - cum) > tol; ++k) {
    // vk <- vk P with P = I + Q/lambda (left multiplication over CSR rows)
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double vi = vk[i];
      if (vi == 0.0) continue;
      tmp[i] += vi * (1.0 + chain.diag[i] / lambda);
      for (std::size_t e = chain.row_ptr[i]; e < chain.row_ptr[i + 1]; ++e)
        tmp[chain.col[e]] += vi * chain.rate[e] / lambda;
    }
    vk.swap(tmp);
    pk *= a / static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) w[i] += pk * vk[i];
    cum += pk;
  }
  if ((1.0 - cum) > tol)
    throw std::runtime_error("transient: uniformization tail did not converge");
  v.swap(w);
}

}  // namespace

Dist transient(const Ctmc& chain, const Dist& p0, double t, double tol) {
  if (t < 0.0) throw std::invalid_argument("transient: t must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("transient: tol must be > 0");
  if (p0.p.size() != chain.n()) throw std::invalid_argument("transient: dist/chain mismatch");
  double lambda = 0.0;
  for (double d : chain.diag) lambda = std::max(lambda, -d);
  std::vector<double> v = p0.p;
  if (t == 0.0 || lambda == 0.0) return make_dist(chain, std::move(v));

  // cap Lambda dt per window so exp(-Lambda dt) stays representable
  std::size_t chunks = static_cast<std::size_t>(std::ceil(lambda * t / 300.0));
  if (chunks == 0) chunks = 1;
  double dt = t / static_cast<double>(chunks);
  double tol_chunk = tol / static_cast<double>(chunks);
  for (std::size_t c = 0; c < chunks; ++c)
    uniformization_step(chain, v, lambda, dt, tol_chunk);

  for (double& x : v) {
    if (x < -1e-14) throw std::runtime_error("transient: negative probability beyond roundoff");
    if (x < 0.0) x = 0.0;
  }
  Dist d;
  d.states = chain.states;
  d.p = std::move(v);
  return d;
}

PathSample simulate(const Ctmc& chain, const StateLabel& x0, double horizon, Rng& rng) {
  if (horizon < 0.0) throw std::invalid_argument("simulate: horizon must be >= 0");
  PathSample path;
  std::size_t x = chain.index_of(x0);
  double t = 0.0;
  path.times.push_back(0.0);
  path.states.push_back(chain.states[x]);
  while (true) {
    double out = -chain.diag[x];
    if (out <= 0.0) break;  // absorbed
    t += rng.exponential(out);
    if (t > horizon) break;
    double pick = rng.uniform() * out;
    std::size_t next = chain.col[chain.row_ptr[x + 1] - 1];  // fallback: last entry
    double acc = 0.0;
    for (std::size_t e = chain.row_ptr[x]; e < chain.row_ptr[x + 1]; ++e) {
      acc += chain.rate[e];
      if (pick < acc) {
        next = chain.col[e];
        break;
      }
    }
    x = next;
    path.times.push_back(t);
    path.states.push_back(chain.states[x]);
  }
  return path;
}

double expect(const Dist& dist, const std::function<double(const StateLabel&)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < dist.p.size(); ++i)
    if (dist.p[i] != 0.0) s += f(dist.states[i]) * dist.p[i];
  return s;
}

void write_dist_csv(const Dist& dist, std::ostream& os) {
  os << "state,probability\n";
  for (std::size_t i = 0; i < dist.p.size(); ++i)
    os << dist.states[i].str() << "," << format_double(dist.p[i]) << "\n";
}

void export_matrix_market(const Ctmc& chain, std::ostream& os) {
  std::size_t n = chain.n();
  std::size_t nnz = chain.rate.size() + n;  // diagonal always materialised
  os << "%%MatrixMarket-style coordinate real general (0-based indices)\n";
  os << n << " " << n << " " << nnz << "\n";
  for (std::size_t i = 0; i < n; ++i) {
    os << i << " " << i << " " << format_double(chain.diag[i]) << "\n";
    for (std::size_t e = chain.row_ptr[i]; e < chain.row_ptr[i + 1]; ++e)
      os << i << " " << chain.col[e] << " " << format_double(chain.rate[e]) << "\n";
  }
}

}  // namespace moran
