#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "moran/ctmc.hpp"
#include "moran/params.hpp"
#include "moran/rng.hpp"

namespace moran {

enum class EventKind { Neutral, Selective, MutDel, MutBen };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Neutral;
  std::int32_t dst = -1;  // replaced site; the mutated site for mutations
  std::int32_t src = -1;  // neutral parent
  std::vector<std::int32_t> J;  // selective candidates in arrival order
};

struct EventLog {
  std::int64_t N = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<Event> events;  // strictly increasing times in (0, horizon)
};

// one Poisson clock at rate N(1 + u + sum_m s_m), arrivals classified by
// relative weight; self-arrows are kept (they are no-ops forward and
// backward)
EventLog sample_event_log(const ModelParams& p, double horizon, Rng& rng);

std::string event_log_to_jsonl(const EventLog& log);
EventLog event_log_from_jsonl(const std::string& text);

// ---- forward sweeps ----------------------------------------------------

struct TypePath {
  std::vector<double> times;      // jump times of the unfit count, 0 first
  std::vector<std::int64_t> k;    // unfit count from times[i] on
  std::vector<std::uint8_t> final_types;
};

// colouring: 1 = unfit per site at time 0
TypePath propagate_types(const EventLog& log, const std::vector<std::uint8_t>& colouring);

struct AncestryResult {
  std::vector<std::int32_t> ancestor;   // site at time 0 each line descends from
  std::vector<std::int8_t> last_mut;    // -1 none, else the type the last mutation wrote
  std::vector<std::uint8_t> final_types;
};

AncestryResult propagate_ancestry(const EventLog& log, const std::vector<std::uint8_t>& colouring);

struct DescendantPath {
  std::vector<double> times;                    // jump times of (k,d,b), 0 first
  std::vector<std::array<std::int64_t, 3>> kdb;
};

// tracks how many sites currently descend from `start_set`, split by type
DescendantPath descendant_counts(const EventLog& log,
                                 const std::vector<std::uint8_t>& colouring,
                                 const std::vector<std::int32_t>& start_set);

// ---- backward sweeps ---------------------------------------------------

// single backward steps, exposed so tests can run several set-valued
// processes in lockstep over one log

// potential-ancestor set with killing: beneficial mutation inside the set
// kills, deleterious prunes the mutated line
void killed_step(const Event& ev, std::vector<std::int32_t>& set, bool& killed);

// plain branching-coalescing set: mutations ignored
void untyped_step(const Event& ev, std::vector<std::int32_t>& set);

struct PldState {
  std::vector<std::int32_t> sites;  // by level, lowest first
  std::size_t immune = 0;           // index into sites
};

// ordered-level step with pruning and immunity
void pld_step(const Event& ev, PldState& st);

struct KilledPath {
  std::vector<double> r;            // backward times of counter jumps, 0 first
  std::vector<StateLabel> value;    // counter value from r[i] on; cemetery once killed
  std::vector<std::int32_t> final_set;
  bool killed = false;
};

KilledPath extract_R_path(const EventLog& log, const std::vector<std::int32_t>& sample);

struct PldPath {
  std::vector<double> r;        // backward times of line-count jumps, 0 first
  std::vector<std::int64_t> L;  // line count from r[i] on
  PldState final_state;
};

PldPath extract_pld_path(const EventLog& log, std::int32_t start_site);

// runs the pruned sweep for one uniformly coloured sample with k unfit sites
// and reports the ancestral type (1 = unfit)
int empirical_ancestral_type(const EventLog& log, std::int64_t k, Rng& rng);

}  // namespace moran
