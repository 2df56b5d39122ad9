#include "moran/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace moran {

namespace {

void sort_and_check_orders(RateMap& rates) {
  std::sort(rates.begin(), rates.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i].first < 1) throw ValidationError("selection order must be >= 1");
    if (i > 0 && rates[i].first == rates[i - 1].first)
      throw ValidationError("duplicate selection order");
    if (!(rates[i].second >= 0.0) || !std::isfinite(rates[i].second))
      throw ValidationError("selection rate must be finite and >= 0");
  }
}

// dense sequence up to the largest key; absent entries are explicit zeros
std::vector<double> densify(const RateMap& rates) {
  std::int64_t maxm = 0;
  for (const auto& [m, s] : rates) maxm = std::max(maxm, m);
  std::vector<double> dense(static_cast<std::size_t>(maxm) + 1, 0.0);
  for (const auto& [m, s] : rates) dense[static_cast<std::size_t>(m)] = s;
  return dense;
}

}  // namespace

bigrat parse_rational(const std::string& s) {
  auto bad = [&] { return ValidationError("cannot parse rational: '" + s + "'"); };
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw bad();
  auto slash = t.find('/');
  try {
    if (slash == std::string::npos) return bigrat(bigint(t));
    bigint p(t.substr(0, slash));
    bigint q(t.substr(slash + 1));
    if (q == 0) throw bad();
    return bigrat(p, q);
  } catch (const std::runtime_error&) {
    throw bad();
  }
}

RateMap dom_to_ftw(const RateMap& dom) {
  RateMap sorted = dom;
  sort_and_check_orders(sorted);
  std::vector<double> shat = densify(sorted);
  for (std::size_t m = 1; m + 1 < shat.size(); ++m)
    if (shat[m] < shat[m + 1])
      throw ValidationError("DOM rates: non-increasing violated");
  RateMap ftw;
  for (std::size_t m = 1; m < shat.size(); ++m) {
    double next = m + 1 < shat.size() ? shat[m + 1] : 0.0;
    double diff = shat[m] - next;
    if (diff != 0.0) ftw.emplace_back(static_cast<std::int64_t>(m), diff);
  }
  return ftw;
}

RateMap ftw_to_dom(const RateMap& ftw) {
  RateMap sorted = ftw;
  sort_and_check_orders(sorted);
  std::vector<double> s = densify(sorted);
  RateMap dom;
  double tail = 0.0;
  std::vector<double> shat(s.size(), 0.0);
  for (std::size_t m = s.size(); m-- > 1;) {
    tail += s[m];
    shat[m] = tail;
  }
  for (std::size_t m = 1; m < shat.size(); ++m)
    if (shat[m] != 0.0) dom.emplace_back(static_cast<std::int64_t>(m), shat[m]);
  return dom;
}

double effective_branching_rate(const SelectionSpec& spec) {
  RateMap ftw = spec.scheme == SelectionScheme::FTW ? spec.rates : dom_to_ftw(spec.rates);
  double b = 0.0;
  for (const auto& [m, s] : ftw) b += static_cast<double>(m) * s;
  return b;
}

ModelParams ModelParams::as_ftw() const {
  if (selection.scheme == SelectionScheme::FTW) return *this;
  ModelParams p = *this;
  p.selection.scheme = SelectionScheme::FTW;
  p.selection.rates = dom_to_ftw(selection.rates);
  // exact rational differencing mirrors the float conversion
  std::int64_t maxm = 0;
  for (const auto& [m, s] : rates_rat) maxm = std::max(maxm, m);
  std::vector<bigrat> shat(static_cast<std::size_t>(maxm) + 2, bigrat(0));
  for (const auto& [m, s] : rates_rat) shat[static_cast<std::size_t>(m)] = s;
  p.rates_rat.clear();
  for (std::int64_t m = 1; m <= maxm; ++m) {
    bigrat diff = shat[static_cast<std::size_t>(m)] - shat[static_cast<std::size_t>(m) + 1];
    if (diff != 0) p.rates_rat.emplace_back(m, diff);
  }
  return p;
}

ModelParams validate(ModelParams p) {
  if (p.N < 1) throw ValidationError("N must be a positive integer");
  if (!(p.u >= 0.0) || !std::isfinite(p.u)) throw ValidationError("u must be finite and >= 0");
  if (!(p.nu0 > 0.0 && p.nu0 < 1.0)) throw ValidationError("nu0 must lie in (0,1)");
  sort_and_check_orders(p.selection.rates);
  if (p.selection.scheme == SelectionScheme::DOM) {
    std::vector<double> shat = densify(p.selection.rates);
    for (std::size_t m = 1; m + 1 < shat.size(); ++m)
      if (shat[m] < shat[m + 1])
        throw ValidationError("DOM rates: non-increasing violated");
  }
  if (!(effective_branching_rate(p.selection) > 0.0))
    throw ValidationError("trivial neutral case: effective branching rate must be > 0");

  // repair rational mirrors that do not match the binary64 fields
  if (rat_to_double(p.u_rat) != p.u) p.u_rat = rat_from_double(p.u);
  if (rat_to_double(p.nu0_rat) != p.nu0) p.nu0_rat = rat_from_double(p.nu0);
  bool mirrors_ok = p.rates_rat.size() == p.selection.rates.size();
  if (mirrors_ok) {
    std::sort(p.rates_rat.begin(), p.rates_rat.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < p.rates_rat.size(); ++i) {
      if (p.rates_rat[i].first != p.selection.rates[i].first ||
          rat_to_double(p.rates_rat[i].second) != p.selection.rates[i].second) {
        mirrors_ok = false;
        break;
      }
    }
  }
  if (!mirrors_ok) {
    p.rates_rat.clear();
    for (const auto& [m, s] : p.selection.rates) p.rates_rat.emplace_back(m, rat_from_double(s));
  }
  return p;
}

ModelParams make_params(std::int64_t N, double u, double nu0,
                        SelectionScheme scheme, RateMap rates) {
  ModelParams p;
  p.N = N;
  p.u = u;
  p.nu0 = nu0;
  p.selection.scheme = scheme;
  p.selection.rates = std::move(rates);
  return validate(std::move(p));
}

namespace {

using nlohmann::json;

// number, or string "p/q"; fills both the binary64 value and the exact mirror
void read_rat_field(const json& j, const char* key, double& out, bigrat& out_rat) {
  const json& v = j.at(key);
  if (v.is_string()) {
    out_rat = parse_rational(v.get<std::string>());
    out = rat_to_double(out_rat);
  } else if (v.is_number()) {
    out = v.get<double>();
    out_rat = rat_from_double(out);
  } else {
    throw ValidationError(std::string(key) + ": expected number or \"p/q\" string");
  }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw ValidationError(std::string("unknown key '") + it.key() + "' in " + where);
  }
}

}  // namespace

ModelParams params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("parameter JSON: ") + e.what());
  }
  try {
    reject_unknown_keys(j, {"N", "u", "nu0", "selection"}, "parameters");
    ModelParams p;
    p.N = j.at("N").get<std::int64_t>();
    read_rat_field(j, "u", p.u, p.u_rat);
    read_rat_field(j, "nu0", p.nu0, p.nu0_rat);
    const json& sel = j.at("selection");
    reject_unknown_keys(sel, {"scheme", "rates"}, "selection");
    std::string scheme = sel.at("scheme").get<std::string>();
    if (scheme == "ftw")
      p.selection.scheme = SelectionScheme::FTW;
    else if (scheme == "dom")
      p.selection.scheme = SelectionScheme::DOM;
    else
      throw ValidationError("selection.scheme must be \"ftw\" or \"dom\"");
    for (const json& entry : sel.at("rates")) {
      if (!entry.is_array() || entry.size() != 2)
        throw ValidationError("selection.rates entries must be [order, rate] pairs");
      std::int64_t m = entry[0].get<std::int64_t>();
      double s;
      bigrat s_rat;
      if (entry[1].is_string()) {
        s_rat = parse_rational(entry[1].get<std::string>());
        s = rat_to_double(s_rat);
      } else {
        s = entry[1].get<double>();
        s_rat = rat_from_double(s);
      }
      p.selection.rates.emplace_back(m, s);
      p.rates_rat.emplace_back(m, s_rat);
    }
    return validate(std::move(p));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("parameter JSON: ") + e.what());
  }
}

double DiffusionParams::total_sigma() const {
  double t = 0.0;
  for (const auto& [m, s] : sigma) t += s;
  return t;
}

std::int64_t DiffusionParams::max_order() const {
  std::int64_t maxm = 0;
  for (const auto& [m, s] : sigma) maxm = std::max(maxm, m);
  return maxm;
}

DiffusionParams validate(DiffusionParams p) {
  if (!(p.theta >= 0.0) || !std::isfinite(p.theta))
    throw ValidationError("theta must be finite and >= 0");
  if (!(p.nu0 > 0.0 && p.nu0 < 1.0)) throw ValidationError("nu0 must lie in (0,1)");
  std::sort(p.sigma.begin(), p.sigma.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < p.sigma.size(); ++i) {
    if (p.sigma[i].first < 1) throw ValidationError("sigma order must be >= 1");
    if (i > 0 && p.sigma[i].first == p.sigma[i - 1].first)
      throw ValidationError("duplicate sigma order");
    if (!(p.sigma[i].second >= 0.0) || !std::isfinite(p.sigma[i].second))
      throw ValidationError("sigma rate must be finite and >= 0");
  }
  return p;
}

std::string params_to_json(const ModelParams& p) {
  json rates = json::array();
  for (const auto& [m, s] : p.selection.rates) rates.push_back({m, s});
  json j{{"N", p.N},
         {"u", p.u},
         {"nu0", p.nu0},
         {"selection",
          {{"scheme", p.selection.scheme == SelectionScheme::FTW ? "ftw" : "dom"},
           {"rates", rates}}}};
  return j.dump();
}

std::string dparams_to_json(const DiffusionParams& p) {
  json sigma = json::array();
  for (const auto& [m, s] : p.sigma) sigma.push_back({m, s});
  json j{{"theta", p.theta}, {"nu0", p.nu0}, {"sigma", sigma}};
  return j.dump();
}

DiffusionParams dparams_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("diffusion JSON: ") + e.what());
  }
  try {
    reject_unknown_keys(j, {"theta", "nu0", "sigma"}, "diffusion parameters");
    DiffusionParams p;
    p.theta = j.at("theta").get<double>();
    p.nu0 = j.at("nu0").get<double>();
    for (const json& entry : j.at("sigma")) {
      if (!entry.is_array() || entry.size() != 2)
        throw ValidationError("sigma entries must be [order, rate] pairs");
      p.sigma.emplace_back(entry[0].get<std::int64_t>(), entry[1].get<double>());
    }
    return validate(std::move(p));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("diffusion JSON: ") + e.what());
  }
}

}  // namespace moran
