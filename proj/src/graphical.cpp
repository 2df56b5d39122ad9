#include "moran/graphical.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace moran {

namespace {

using json = nlohmann::json;

bool sorted_contains(const std::vector<std::int32_t>& v, std::int32_t x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  return it != v.end() && *it == x;
}

void sorted_insert(std::vector<std::int32_t>& v, std::int32_t x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

void sorted_erase(std::vector<std::int32_t>& v, std::int32_t x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

void check_site(std::int64_t N, std::int64_t s, const char* who) {
  if (s < 0 || s >= N)
    throw ValidationError(std::string(who) + ": site index outside [0,N)");
}

// selective parent: first fit candidate in arrival order, else the
// replaced site itself keeps its line
std::int32_t realised_parent(const Event& ev, const std::vector<std::uint8_t>& types) {
  for (std::int32_t j : ev.J)
    if (types[static_cast<std::size_t>(j)] == 0) return j;
  return ev.dst;
}

}  // namespace

EventLog sample_event_log(const ModelParams& p, double horizon, Rng& rng) {
  ModelParams q = p.as_ftw();
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_event_log: horizon > 0 required");
  double Nd = static_cast<double>(q.N);
  double total_s = 0.0;
  for (const auto& [m, sm] : q.selection.rates) total_s += sm;
  double total = Nd * (1.0 + q.u + total_s);

  EventLog log;
  log.N = q.N;
  log.horizon = horizon;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(total);
    if (t >= horizon) break;
    Event ev;
    ev.time = t;
    double v = rng.uniform() * total;
    if (v < Nd) {
      ev.kind = EventKind::Neutral;
      ev.src = static_cast<std::int32_t>(rng.uniform_int(static_cast<std::uint64_t>(q.N)));
      ev.dst = static_cast<std::int32_t>(rng.uniform_int(static_cast<std::uint64_t>(q.N)));
    } else if (v < Nd * (1.0 + q.u)) {
      ev.kind = rng.bernoulli(q.nu1()) ? EventKind::MutDel : EventKind::MutBen;
      ev.dst = static_cast<std::int32_t>(rng.uniform_int(static_cast<std::uint64_t>(q.N)));
    } else {
      double acc = Nd * (1.0 + q.u);
      std::int64_t order = q.selection.rates.back().first;
      for (const auto& [m, sm] : q.selection.rates) {
        acc += Nd * sm;
        if (v < acc) {
          order = m;
          break;
        }
      }
      ev.kind = EventKind::Selective;
      ev.dst = static_cast<std::int32_t>(rng.uniform_int(static_cast<std::uint64_t>(q.N)));
      ev.J.resize(static_cast<std::size_t>(order));
      for (auto& j : ev.J)
        j = static_cast<std::int32_t>(rng.uniform_int(static_cast<std::uint64_t>(q.N)));
    }
    log.events.push_back(std::move(ev));
  }
  return log;
}

std::string event_log_to_jsonl(const EventLog& log) {
  std::ostringstream os;
  os << json{{"format", "moran-asg-eventlog"},
             {"version", 1},
             {"N", log.N},
             {"horizon", log.horizon},
             {"seed", log.seed}}
            .dump()
     << '\n';
  for (const Event& ev : log.events) {
    json j;
    j["t"] = ev.time;
    switch (ev.kind) {
      case EventKind::Neutral:
        j["kind"] = "neutral";
        j["src"] = ev.src;
        j["dst"] = ev.dst;
        break;
      case EventKind::Selective:
        j["kind"] = "selective";
        j["dst"] = ev.dst;
        j["J"] = ev.J;
        break;
      case EventKind::MutDel:
        j["kind"] = "mut_del";
        j["site"] = ev.dst;
        break;
      case EventKind::MutBen:
        j["kind"] = "mut_ben";
        j["site"] = ev.dst;
        break;
    }
    os << j.dump() << '\n';
  }
  return os.str();
}

EventLog event_log_from_jsonl(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("event log: empty input");
  EventLog log;
  try {
    json h = json::parse(line);
    if (h.at("format").get<std::string>() != "moran-asg-eventlog")
      throw ValidationError("event log: unrecognised format tag");
    if (h.at("version").get<std::int64_t>() != 1)
      throw ValidationError("event log: unsupported version");
    log.N = h.at("N").get<std::int64_t>();
    log.horizon = h.at("horizon").get<double>();
    log.seed = h.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("event log header: ") + e.what());
  }
  if (log.N < 1 || !(log.horizon > 0.0))
    throw ValidationError("event log header: bad N or horizon");

  double last_t = 0.0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Event ev;
    try {
      json j = json::parse(line);
      ev.time = j.at("t").get<double>();
      std::string kind = j.at("kind").get<std::string>();
      if (kind == "neutral") {
        ev.kind = EventKind::Neutral;
        ev.src = j.at("src").get<std::int32_t>();
        ev.dst = j.at("dst").get<std::int32_t>();
      } else if (kind == "selective") {
        ev.kind = EventKind::Selective;
        ev.dst = j.at("dst").get<std::int32_t>();
        ev.J = j.at("J").get<std::vector<std::int32_t>>();
      } else if (kind == "mut_del" || kind == "mut_ben") {
        ev.kind = kind == "mut_del" ? EventKind::MutDel : EventKind::MutBen;
        ev.dst = j.at("site").get<std::int32_t>();
      } else {
        throw ValidationError("event log: unknown kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ValidationError(std::string("event log entry: ") + e.what());
    }
    if (!(ev.time > last_t) || ev.time > log.horizon)
      throw ValidationError("event log: times must increase within (0, horizon]");
    last_t = ev.time;
    check_site(log.N, ev.dst, "event log");
    if (ev.kind == EventKind::Neutral) check_site(log.N, ev.src, "event log");
    for (std::int32_t j : ev.J) check_site(log.N, j, "event log");
    log.events.push_back(std::move(ev));
  }
  return log;
}

namespace {

void check_colouring(const EventLog& log, const std::vector<std::uint8_t>& colouring) {
  if (colouring.size() != static_cast<std::size_t>(log.N))
    throw std::invalid_argument("colouring size must equal N");
  for (std::uint8_t c : colouring)
    if (c > 1) throw std::invalid_argument("colouring entries must be 0 or 1");
}

}  // namespace

TypePath propagate_types(const EventLog& log, const std::vector<std::uint8_t>& colouring) {
  check_colouring(log, colouring);
  std::vector<std::uint8_t> types(colouring);
  std::int64_t k = 0;
  for (std::uint8_t c : types) k += c;
  TypePath path;
  path.times.push_back(0.0);
  path.k.push_back(k);
  for (const Event& ev : log.events) {
    std::size_t dst = static_cast<std::size_t>(ev.dst);
    std::uint8_t before = types[dst];
    switch (ev.kind) {
      case EventKind::Neutral:
        types[dst] = types[static_cast<std::size_t>(ev.src)];
        break;
      case EventKind::Selective:
        types[dst] = types[static_cast<std::size_t>(realised_parent(ev, types))];
        break;
      case EventKind::MutDel:
        types[dst] = 1;
        break;
      case EventKind::MutBen:
        types[dst] = 0;
        break;
    }
    k += static_cast<std::int64_t>(types[dst]) - static_cast<std::int64_t>(before);
    if (types[dst] != before) {
      path.times.push_back(ev.time);
      path.k.push_back(k);
    }
  }
  path.final_types = std::move(types);
  return path;
}

AncestryResult propagate_ancestry(const EventLog& log, const std::vector<std::uint8_t>& colouring) {
  check_colouring(log, colouring);
  std::size_t N = static_cast<std::size_t>(log.N);
  AncestryResult res;
  res.ancestor.resize(N);
  for (std::size_t i = 0; i < N; ++i) res.ancestor[i] = static_cast<std::int32_t>(i);
  res.last_mut.assign(N, -1);
  std::vector<std::uint8_t> types(colouring);

  for (const Event& ev : log.events) {
    std::size_t dst = static_cast<std::size_t>(ev.dst);
    switch (ev.kind) {
      case EventKind::Neutral: {
        std::size_t src = static_cast<std::size_t>(ev.src);
        types[dst] = types[src];
        res.ancestor[dst] = res.ancestor[src];
        res.last_mut[dst] = res.last_mut[src];
        break;
      }
      case EventKind::Selective: {
        std::size_t par = static_cast<std::size_t>(realised_parent(ev, types));
        types[dst] = types[par];
        res.ancestor[dst] = res.ancestor[par];
        res.last_mut[dst] = res.last_mut[par];
        break;
      }
      case EventKind::MutDel:
        types[dst] = 1;
        res.last_mut[dst] = 1;
        break;
      case EventKind::MutBen:
        types[dst] = 0;
        res.last_mut[dst] = 0;
        break;
    }
  }

  // a line's final type is its last mutation, or failing that the colour of
  // the site its lineage started from
  for (std::size_t i = 0; i < N; ++i) {
    std::uint8_t want = res.last_mut[i] >= 0
                            ? static_cast<std::uint8_t>(res.last_mut[i])
                            : colouring[static_cast<std::size_t>(res.ancestor[i])];
    if (types[i] != want)
      throw std::logic_error("propagate_ancestry: forward/backward type mismatch");
  }
  res.final_types = std::move(types);
  return res;
}

DescendantPath descendant_counts(const EventLog& log,
                                 const std::vector<std::uint8_t>& colouring,
                                 const std::vector<std::int32_t>& start_set) {
  check_colouring(log, colouring);
  std::vector<std::uint8_t> types(colouring);
  std::vector<std::uint8_t> desc(static_cast<std::size_t>(log.N), 0);
  for (std::int32_t s : start_set) {
    check_site(log.N, s, "descendant_counts");
    desc[static_cast<std::size_t>(s)] = 1;
  }

  auto tally = [&]() {
    std::array<std::int64_t, 3> kdb{0, 0, 0};
    for (std::size_t i = 0; i < types.size(); ++i) {
      kdb[0] += types[i];
      if (desc[i]) {
        if (types[i])
          ++kdb[1];
        else
          ++kdb[2];
      }
    }
    return kdb;
  };

  DescendantPath path;
  path.times.push_back(0.0);
  path.kdb.push_back(tally());
  for (const Event& ev : log.events) {
    std::size_t dst = static_cast<std::size_t>(ev.dst);
    switch (ev.kind) {
      case EventKind::Neutral: {
        std::size_t src = static_cast<std::size_t>(ev.src);
        types[dst] = types[src];
        desc[dst] = desc[src];
        break;
      }
      case EventKind::Selective: {
        std::size_t par = static_cast<std::size_t>(realised_parent(ev, types));
        types[dst] = types[par];
        desc[dst] = desc[par];
        break;
      }
      case EventKind::MutDel:
        types[dst] = 1;
        break;
      case EventKind::MutBen:
        types[dst] = 0;
        break;
    }
    auto kdb = tally();
    if (kdb != path.kdb.back()) {
      path.times.push_back(ev.time);
      path.kdb.push_back(kdb);
    }
  }
  return path;
}

void killed_step(const Event& ev, std::vector<std::int32_t>& set, bool& killed) {
  if (killed) return;
  switch (ev.kind) {
    case EventKind::Neutral:
      if (ev.src != ev.dst && sorted_contains(set, ev.dst)) {
        sorted_erase(set, ev.dst);
        sorted_insert(set, ev.src);
      }
      return;
    case EventKind::Selective:
      if (sorted_contains(set, ev.dst))
        for (std::int32_t j : ev.J) sorted_insert(set, j);
      return;
    case EventKind::MutDel:
      sorted_erase(set, ev.dst);
      return;
    case EventKind::MutBen:
      if (sorted_contains(set, ev.dst)) killed = true;
      return;
  }
}

void untyped_step(const Event& ev, std::vector<std::int32_t>& set) {
  switch (ev.kind) {
    case EventKind::Neutral:
      if (ev.src != ev.dst && sorted_contains(set, ev.dst)) {
        sorted_erase(set, ev.dst);
        sorted_insert(set, ev.src);
      }
      return;
    case EventKind::Selective:
      if (sorted_contains(set, ev.dst))
        for (std::int32_t j : ev.J) sorted_insert(set, j);
      return;
    default:
      return;
  }
}

void pld_step(const Event& ev, PldState& st) {
  auto& sites = st.sites;
  if (sites.empty()) throw std::logic_error("pld_step: empty state");
  auto find_idx = [&sites](std::int32_t s) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (sites[i] == s) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };

  switch (ev.kind) {
    case EventKind::Neutral: {
      if (ev.src == ev.dst) return;
      std::ptrdiff_t pd = find_idx(ev.dst);
      if (pd < 0) return;
      std::ptrdiff_t ps = find_idx(ev.src);
      if (ps >= 0) {
        // both lines present: they merge at the lower level
        std::size_t lo = static_cast<std::size_t>(std::min(ps, pd));
        std::size_t hi = static_cast<std::size_t>(std::max(ps, pd));
        bool imm = st.immune == static_cast<std::size_t>(ps) ||
                   st.immune == static_cast<std::size_t>(pd);
        sites[lo] = ev.src;
        sites.erase(sites.begin() + static_cast<std::ptrdiff_t>(hi));
        if (imm)
          st.immune = lo;
        else if (st.immune > hi)
          --st.immune;
      } else {
        // tail line not tracked at a finite level: plain relocation
        sites[static_cast<std::size_t>(pd)] = ev.src;
      }
      return;
    }
    case EventKind::Selective: {
      std::ptrdiff_t pd = find_idx(ev.dst);
      if (pd < 0) return;
      std::size_t i = static_cast<std::size_t>(pd);
      std::int32_t imm_site = sites[st.immune];

      // incoming candidates take consecutive levels from i in arrival order;
      // candidates already strictly below i keep their levels
      std::vector<std::int32_t> block;
      auto in_block = [&block](std::int32_t s) {
        return std::find(block.begin(), block.end(), s) != block.end();
      };
      for (std::int32_t j : ev.J) {
        std::ptrdiff_t pj = find_idx(j);
        if (pj >= 0 && static_cast<std::size_t>(pj) < i) continue;
        if (!in_block(j)) block.push_back(j);
      }

      std::vector<std::int32_t> next(sites.begin(), sites.begin() + static_cast<std::ptrdiff_t>(i));
      next.insert(next.end(), block.begin(), block.end());
      if (!in_block(ev.dst)) next.push_back(ev.dst);
      for (std::size_t q = i + 1; q < sites.size(); ++q)
        if (!in_block(sites[q])) next.push_back(sites[q]);
      sites = std::move(next);

      for (std::size_t q = 0; q < sites.size(); ++q)
        if (sites[q] == imm_site) {
          st.immune = q;
          break;
        }
      return;
    }
    case EventKind::MutDel: {
      std::ptrdiff_t pz = find_idx(ev.dst);
      if (pz < 0) return;
      if (static_cast<std::size_t>(pz) == st.immune) {
        // the immune line survives and falls back to the top finite level
        std::int32_t z = sites[static_cast<std::size_t>(pz)];
        sites.erase(sites.begin() + pz);
        sites.push_back(z);
        st.immune = sites.size() - 1;
      } else {
        sites.erase(sites.begin() + pz);
        if (st.immune > static_cast<std::size_t>(pz)) --st.immune;
      }
      return;
    }
    case EventKind::MutBen: {
      std::ptrdiff_t pz = find_idx(ev.dst);
      if (pz < 0) return;
      // everything above the mutated line is unreachable from the root
      sites.resize(static_cast<std::size_t>(pz) + 1);
      st.immune = static_cast<std::size_t>(pz);
      return;
    }
  }
}

KilledPath extract_R_path(const EventLog& log, const std::vector<std::int32_t>& sample) {
  std::vector<std::int32_t> set;
  for (std::int32_t s : sample) {
    check_site(log.N, s, "extract_R_path");
    sorted_insert(set, s);
  }
  if (set.size() != sample.size())
    throw std::invalid_argument("extract_R_path: sample sites must be distinct");

  KilledPath path;
  path.r.push_back(0.0);
  path.value.push_back(StateLabel::count(static_cast<std::int64_t>(set.size())));
  bool killed = false;
  for (auto it = log.events.rbegin(); it != log.events.rend(); ++it) {
    std::size_t before = set.size();
    killed_step(*it, set, killed);
    if (killed) {
      path.r.push_back(log.horizon - it->time);
      path.value.push_back(StateLabel::cemetery());
      break;
    }
    if (set.size() != before) {
      path.r.push_back(log.horizon - it->time);
      path.value.push_back(StateLabel::count(static_cast<std::int64_t>(set.size())));
    }
  }
  path.killed = killed;
  if (!killed) path.final_set = std::move(set);
  return path;
}

PldPath extract_pld_path(const EventLog& log, std::int32_t start_site) {
  check_site(log.N, start_site, "extract_pld_path");
  PldState st;
  st.sites = {start_site};
  st.immune = 0;

  PldPath path;
  path.r.push_back(0.0);
  path.L.push_back(1);
  for (auto it = log.events.rbegin(); it != log.events.rend(); ++it) {
    std::size_t before = st.sites.size();
    pld_step(*it, st);
    if (st.sites.size() != before) {
      path.r.push_back(log.horizon - it->time);
      path.L.push_back(static_cast<std::int64_t>(st.sites.size()));
    }
  }
  path.final_state = std::move(st);
  return path;
}

int empirical_ancestral_type(const EventLog& log, std::int64_t k, Rng& rng) {
  if (k < 0 || k > log.N)
    throw std::invalid_argument("empirical_ancestral_type: k outside [0,N]");
  PldState st;
  st.sites = {static_cast<std::int32_t>(rng.uniform_int(static_cast<std::uint64_t>(log.N)))};
  st.immune = 0;
  for (auto it = log.events.rbegin(); it != log.events.rend(); ++it) pld_step(*it, st);

  // uniform colouring with k unfit sites via a partial shuffle
  std::size_t N = static_cast<std::size_t>(log.N);
  std::vector<std::int32_t> perm(N);
  for (std::size_t i = 0; i < N; ++i) perm[i] = static_cast<std::int32_t>(i);
  std::vector<std::uint8_t> unfit(N, 0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(N - i)));
    std::swap(perm[i], perm[j]);
    unfit[static_cast<std::size_t>(perm[i])] = 1;
  }

  for (std::int32_t s : st.sites)
    if (!unfit[static_cast<std::size_t>(s)]) return 0;
  return 1;
}

}  // namespace moran
