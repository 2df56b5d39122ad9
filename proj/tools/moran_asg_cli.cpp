#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "moran/ancestral.hpp"
#include "moran/ctmc.hpp"
#include "moran/diffusion.hpp"
#include "moran/dualities.hpp"
#include "moran/generators.hpp"
#include "moran/graphical.hpp"
#include "moran/haldane.hpp"
#include "moran/parallel.hpp"
#include "moran/params.hpp"
#include "moran/rng.hpp"

namespace {

using namespace moran;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// writes to --out when given, stdout otherwise
struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file.open(path, std::ios::binary);
      if (!file) throw ValidationError("cannot open output file: " + path);
      os = &file;
    }
  }
  std::ostream& out() { return *os; }
};

std::vector<double> parse_grid(const std::string& spec, bool geometric) {
  double lo = 0.0, hi = 0.0;
  long long n = 0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(spec);
  if (!(ss >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || !ss.eof())
    throw ValidationError("grid must look like lo:hi:n, got '" + spec + "'");
  if (n < 1) throw ValidationError("grid needs at least one point");
  if (geometric && (lo <= 0.0 || hi <= 0.0))
    throw ValidationError("geometric grid needs positive endpoints");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    g[static_cast<std::size_t>(i)] =
        geometric ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
  }
  return g;
}

std::vector<std::int64_t> parse_int_list(const std::string& spec) {
  std::vector<std::int64_t> out;
  std::istringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    std::int64_t v = std::stoll(tok, &used);
    if (used != tok.size()) throw ValidationError("bad integer '" + tok + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty integer list");
  return out;
}

StateLabel parse_label(const std::string& s) {
  if (s == "DELTA") return StateLabel::cemetery();
  std::size_t used = 0;
  std::int64_t v = std::stoll(s, &used);
  if (used != s.size()) throw ValidationError("bad state label '" + s + "'");
  return StateLabel::count(v);
}

int run_stationary(const std::string& params_path, const std::string& process,
                   const std::string& anchor, const std::string& out_path) {
  ModelParams p = params_from_json(slurp(params_path)).as_ftw();
  Ctmc chain = process == "Y"   ? build_Q_Y_ftw(p)
               : process == "R" ? build_Q_R(p)
                                : build_Q_L(p);
  std::optional<StateLabel> a;
  if (!anchor.empty()) a = parse_label(anchor);
  Dist d = stationary(chain, a);
  Sink sink(out_path);
  write_dist_csv(d, sink.out());
  return 0;
}

int run_hr(const std::string& params_path, double r, const std::string& out_path) {
  ModelParams p = params_from_json(slurp(params_path));
  AncestralResult res = h_r_via_L(p, r);
  Sink sink(out_path);
  sink.out() << "k,h\n";
  for (std::size_t k = 0; k < res.h.size(); ++k)
    sink.out() << k << ',' << format_double(res.h[k]) << '\n';
  return 0;
}

int run_hinf(const std::string& params_path, const std::string& method, double tol,
             const std::string& out_path) {
  ModelParams p = params_from_json(slurp(params_path));
  std::vector<std::pair<std::string, std::vector<double>>> cols;
  if (method == "recursion" || method == "all")
    cols.emplace_back("h_recursion", h_inf_via_recursion(p).h);
  if (method == "pld" || method == "all") cols.emplace_back("h_pld", h_inf_via_L(p).h);
  if (method == "ytilde" || method == "all")
    cols.emplace_back("h_ytilde", h_inf_via_Ytilde(p).h);

  Sink sink(out_path);
  sink.out() << "k";
  for (const auto& [name, col] : cols) sink.out() << ',' << name;
  sink.out() << '\n';
  for (std::size_t k = 0; k < cols.front().second.size(); ++k) {
    sink.out() << k;
    for (const auto& [name, col] : cols) sink.out() << ',' << format_double(col[k]);
    sink.out() << '\n';
  }

  if (tol > 0.0 && cols.size() > 1) {
    double worst = 0.0;
    for (std::size_t i = 1; i < cols.size(); ++i)
      for (std::size_t k = 0; k < cols[i].second.size(); ++k)
        worst = std::max(worst, std::abs(cols[i].second[k] - cols[0].second[k]));
    if (worst > tol) {
      std::cerr << "route disagreement " << format_double(worst) << " exceeds tolerance\n";
      return 3;
    }
  }
  return 0;
}

int run_duality(const std::string& which, const std::string& params_path,
                const std::string& dparams_path, double t, double tol,
                std::int64_t n_max, std::int64_t n_top, const std::string& table_path,
                const std::string& out_path) {
  DualityReport rep;
  if (which == "diffusion") {
    if (dparams_path.empty()) throw ValidationError("duality --which diffusion needs --dparams");
    DiffusionParams dp = dparams_from_json(slurp(dparams_path));
    DiffusionDualityResult res = check_diffusion_duality(dp, n_top, n_max);
    rep = res.report;
    if (!table_path.empty()) {
      Sink table(table_path);
      table.out() << "n,lhs,rhs,residual\n";
      for (std::size_t n = 0; n < res.lhs.size(); ++n)
        table.out() << n << ',' << format_double(res.lhs[n]) << ','
                    << format_double(res.rhs[n]) << ','
                    << format_double(std::abs(res.lhs[n] - res.rhs[n])) << '\n';
    }
  } else {
    if (params_path.empty()) throw ValidationError("duality needs --params");
    ModelParams p = params_from_json(slurp(params_path));
    if (which == "factorial")
      rep = check_factorial_duality(p, t);
    else if (which == "ytilde")
      rep = check_ytilde_L_duality(p, t);
    else if (which == "siegmund")
      rep = check_siegmund_duality(p, t);
    else if (which == "conjugation")
      rep = check_conjugation(p);
    else
      rep = check_descendant_equality(p, t);
  }
  Sink sink(out_path);
  sink.out() << rep.to_json() << '\n';
  if (rep.max_abs_residual > tol) {
    std::cerr << "max residual " << format_double(rep.max_abs_residual)
              << " exceeds tolerance " << format_double(tol) << '\n';
    return 3;
  }
  return 0;
}

int run_fig7(const std::string& configs_path, const std::string& ugrid,
             const std::string& out_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(configs_path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("configs file: ") + e.what());
  }
  std::int64_t N;
  double nu0;
  struct Config {
    std::string label;
    SelectionScheme scheme;
    RateMap rates;
  };
  std::vector<Config> configs;
  try {
    N = j.at("N").get<std::int64_t>();
    nu0 = j.at("nu0").get<double>();
    for (const auto& c : j.at("configs")) {
      Config cfg;
      cfg.label = c.at("label").get<std::string>();
      std::string scheme = c.at("scheme").get<std::string>();
      if (scheme != "ftw" && scheme != "dom")
        throw ValidationError("config scheme must be ftw or dom");
      cfg.scheme = scheme == "ftw" ? SelectionScheme::FTW : SelectionScheme::DOM;
      for (const auto& e : c.at("rates"))
        cfg.rates.emplace_back(e.at(0).get<std::int64_t>(), e.at(1).get<double>());
      configs.push_back(std::move(cfg));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("configs file: ") + e.what());
  }
  if (configs.empty()) throw ValidationError("configs file lists no configurations");

  std::vector<double> grid = parse_grid(ugrid, true);  // u as a multiple of b
  struct Row {
    double u_over_b;
    Fig7Point pt;
    std::string label;
  };
  std::vector<Row> rows(configs.size() * grid.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const Config& cfg = configs[i / grid.size()];
    double g = grid[i % grid.size()];
    double b = effective_branching_rate({cfg.scheme, cfg.rates});
    ModelParams p = make_params(N, g * b, nu0, cfg.scheme, cfg.rates);
    rows[i] = {g, fig7_point(p), cfg.label};
  });

  Sink sink(out_path);
  sink.out() << "u_over_b,mean_unfit,mean_unfit_ancestor,config_label\n";
  for (const Row& r : rows)
    sink.out() << format_double(r.u_over_b) << ',' << format_double(r.pt.mean_unfit) << ','
               << format_double(r.pt.mean_unfit_ancestor) << ',' << r.label << '\n';
  return 0;
}

int run_haldane(double sigma, std::int64_t m, double alpha, const std::string& n_list,
                const std::string& out_path) {
  std::vector<std::int64_t> Ns = parse_int_list(n_list);
  std::vector<HaldaneRow> rows = haldane_scan(sigma, m, alpha, Ns);
  Sink sink(out_path);
  sink.out() << "N,p_fix,haldane_prediction,ratio\n";
  for (const HaldaneRow& r : rows)
    sink.out() << r.N << ',' << format_double(r.p_fix) << ','
               << format_double(r.prediction) << ',' << format_double(r.ratio) << '\n';
  return 0;
}

int run_diffusion_hinf(const std::string& dparams_path, const std::string& ygrid,
                       std::int64_t n_max, const std::string& out_path) {
  DiffusionParams dp = dparams_from_json(slurp(dparams_path));
  HInfDiffusion res = h_inf_diffusion(dp, parse_grid(ygrid, false), n_max);
  Sink sink(out_path);
  sink.out() << "y,h_inf\n";
  for (std::size_t i = 0; i < res.y.size(); ++i)
    sink.out() << format_double(res.y[i]) << ',' << format_double(res.h[i]) << '\n';
  return 0;
}

int run_simulate(const std::string& params_path, std::int64_t replicates, double horizon,
                 std::uint64_t seed, const std::string& extract, std::int64_t n_start,
                 std::int64_t k_start, const std::string& out_path) {
  ModelParams p = params_from_json(slurp(params_path));
  if (replicates < 1) throw ValidationError("--replicates must be >= 1");
  Sink sink(out_path);

  if (extract.empty()) {
    if (replicates != 1)
      throw ValidationError("raw event-log output requires --replicates 1");
    Rng rng(seed);
    EventLog log = sample_event_log(p, horizon, rng);
    log.seed = seed;
    sink.out() << event_log_to_jsonl(log);
    return 0;
  }

  if (extract == "R") {
    if (n_start < 1 || n_start > p.N)
      throw ValidationError("--n must lie in [1, N]");
    sink.out() << "replicate,final_state\n";
    for (std::int64_t i = 0; i < replicates; ++i) {
      Rng rng(seed, static_cast<std::uint64_t>(i));
      EventLog log = sample_event_log(p, horizon, rng);
      std::vector<std::int32_t> sample(static_cast<std::size_t>(n_start));
      for (std::size_t s = 0; s < sample.size(); ++s) sample[s] = static_cast<std::int32_t>(s);
      KilledPath path = extract_R_path(log, sample);
      sink.out() << i << ',' << path.value.back().str() << '\n';
    }
    return 0;
  }
  if (extract == "L") {
    sink.out() << "replicate,final_L\n";
    for (std::int64_t i = 0; i < replicates; ++i) {
      Rng rng(seed, static_cast<std::uint64_t>(i));
      EventLog log = sample_event_log(p, horizon, rng);
      PldPath path = extract_pld_path(log, 0);
      sink.out() << i << ',' << path.L.back() << '\n';
    }
    return 0;
  }
  // descendant
  if (k_start < 0 || k_start > p.N)
    throw ValidationError("--k must lie in [0, N] for --extract descendant");
  sink.out() << "replicate,k,d,b\n";
  for (std::int64_t i = 0; i < replicates; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    EventLog log = sample_event_log(p, horizon, rng);
    std::vector<std::uint8_t> colouring(static_cast<std::size_t>(p.N), 0);
    std::vector<std::int32_t> start;
    for (std::int64_t s = 0; s < k_start; ++s) {
      colouring[static_cast<std::size_t>(s)] = 1;
      start.push_back(static_cast<std::int32_t>(s));
    }
    DescendantPath path = descendant_counts(log, colouring, start);
    const auto& kdb = path.kdb.back();
    sink.out() << i << ',' << kdb[0] << ',' << kdb[1] << ',' << kdb[2] << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-type Moran model with frequency-dependent selection: "
               "forward chains, ancestral structures, and their dualities"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: MORAN_ASG_THREADS or all cores)");

  std::string params_path, dparams_path, out_path;

  auto* st = app.add_subcommand("stationary", "stationary law of a forward or line-count chain");
  std::string st_process, st_anchor;
  st->add_option("--params", params_path, "model parameter JSON file")->required();
  st->add_option("--process", st_process, "Y, R, or L")
      ->required()
      ->check(CLI::IsMember({"Y", "R", "L"}));
  st->add_option("--anchor", st_anchor, "closed class selector (a count or DELTA)");
  st->add_option("--out", out_path, "output CSV path (default stdout)");

  auto* hr = app.add_subcommand("hr", "ancestral unfit probability at backward time r");
  double hr_r = 1.0;
  hr->add_option("--params", params_path)->required();
  hr->add_option("--r", hr_r, "backward horizon")->required();
  hr->add_option("--out", out_path);

  auto* hinf = app.add_subcommand("hinf", "stationary ancestral unfit probability");
  std::string hinf_method = "all";
  double hinf_tol = 0.0;
  hinf->add_option("--params", params_path)->required();
  hinf->add_option("--method", hinf_method, "recursion, pld, ytilde, or all")
      ->check(CLI::IsMember({"recursion", "pld", "ytilde", "all"}));
  hinf->add_option("--tol", hinf_tol, "cross-route tolerance; 0 disables the check");
  hinf->add_option("--out", out_path);

  auto* du = app.add_subcommand("duality", "residuals of one duality identity");
  std::string du_which, du_table;
  double du_t = 1.0, du_tol = 1e-10;
  std::int64_t du_nmax = 200, du_ntop = 20;
  du->add_option("--which", du_which, "identity to check")
      ->required()
      ->check(CLI::IsMember(
          {"factorial", "ytilde", "siegmund", "conjugation", "descendant", "diffusion"}));
  du->add_option("--params", params_path, "model parameter JSON (finite-N identities)");
  du->add_option("--dparams", dparams_path, "diffusion parameter JSON (--which diffusion)");
  du->add_option("--t", du_t, "time horizon");
  du->add_option("--tol", du_tol, "exit 3 when the max residual exceeds this");
  du->add_option("--n-max", du_nmax, "initial truncation window (diffusion)");
  du->add_option("--n-top", du_ntop, "largest moment order (diffusion)");
  du->add_option("--table", du_table, "per-moment CSV path (diffusion)");
  du->add_option("--out", out_path);

  auto* f7 = app.add_subcommand("fig7", "stationary unfit means across mutation rates");
  std::string f7_configs, f7_ugrid = "0.1:10:25";
  f7->add_option("--configs", f7_configs, "JSON file with N, nu0, and selection configs")
      ->required();
  f7->add_option("--ugrid", f7_ugrid, "geometric u/b grid lo:hi:n");
  f7->add_option("--out", out_path);

  auto* ha = app.add_subcommand("haldane", "fixation probabilities against the weak-selection slope");
  double ha_sigma = 1.0, ha_alpha = 0.5;
  std::int64_t ha_m = 1;
  std::string ha_list;
  ha->add_option("--sigma", ha_sigma)->required();
  ha->add_option("--m", ha_m, "selection order")->required();
  ha->add_option("--alpha", ha_alpha, "selection strength decay exponent")->required();
  ha->add_option("--N-list", ha_list, "comma-separated population sizes")->required();
  ha->add_option("--out", out_path);

  auto* dh = app.add_subcommand("diffusion-hinf", "large-population ancestral unfit curve");
  std::string dh_ygrid = "0:1:101";
  std::int64_t dh_nmax = 200;
  dh->add_option("--dparams", dparams_path)->required();
  dh->add_option("--ygrid", dh_ygrid, "linear y grid lo:hi:n");
  dh->add_option("--n-max", dh_nmax, "initial truncation window");
  dh->add_option("--out", out_path);

  auto* si = app.add_subcommand("simulate", "sample event logs or extracted genealogies");
  std::int64_t si_reps = 1, si_n = 1, si_k = -1;
  double si_horizon = 1.0;
  std::uint64_t si_seed = 0;
  std::string si_extract;
  si->add_option("--params", params_path)->required();
  si->add_option("--replicates", si_reps);
  si->add_option("--horizon", si_horizon)->required();
  si->add_option("--seed", si_seed);
  si->add_option("--extract", si_extract, "R, L, or descendant; omit for the raw log")
      ->check(CLI::IsMember({"R", "L", "descendant"}));
  si->add_option("--n", si_n, "initial line count for --extract R");
  si->add_option("--k", si_k, "initial unfit count for --extract descendant");
  si->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  set_default_threads(threads);
  try {
    if (st->parsed()) return run_stationary(params_path, st_process, st_anchor, out_path);
    if (hr->parsed()) return run_hr(params_path, hr_r, out_path);
    if (hinf->parsed()) return run_hinf(params_path, hinf_method, hinf_tol, out_path);
    if (du->parsed())
      return run_duality(du_which, params_path, dparams_path, du_t, du_tol, du_nmax,
                         du_ntop, du_table, out_path);
    if (f7->parsed()) return run_fig7(f7_configs, f7_ugrid, out_path);
    if (ha->parsed()) return run_haldane(ha_sigma, ha_m, ha_alpha, ha_list, out_path);
    if (dh->parsed()) return run_diffusion_hinf(dparams_path, dh_ygrid, dh_nmax, out_path);
    if (si->parsed())
      return run_simulate(params_path, si_reps, si_horizon, si_seed, si_extract, si_n,
                          si_k, out_path);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
