#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "defcal/runtime.hpp"

namespace defcal {

// ---------------------------------------------------------------------------
// canonical state form
// ---------------------------------------------------------------------------

// Renames future ids everywhere in the configuration per `map`, which
// must be a bijection over the configuration's future ids.
Configuration rename_futures(const Configuration& cn,
                             const std::map<FutureId, FutureId>& map);

// Renames future ids to 0..n-1 in first-reachability order: the main
// future, then references found in the global store, then a breadth-
// first sweep over references in reached futures (frames top to
// bottom, locals before the statement), then any remaining futures in
// ascending original id order. Idempotent, and invariant under
// bijective renamings of the input.
Configuration canonicalize(const Configuration& cn);

// ---------------------------------------------------------------------------
// single scheduled runs
// ---------------------------------------------------------------------------

struct SchedulerPolicy {
  enum Kind { RoundRobin, SeededRandom } kind = RoundRobin;
  std::uint64_t seed = 0;  // SeededRandom: mt19937_64 over enabled indices

  static SchedulerPolicy round_robin() { return {RoundRobin, 0}; }
  static SchedulerPolicy random(std::uint64_t seed) {
    return {SeededRandom, seed};
  }
};

struct TraceStep {
  TransitionLabel label;
  Configuration config;  // state after the step
};

struct Trace {
  Configuration initial;
  std::vector<TraceStep> steps;
  enum class Outcome { Terminated, Deadlocked, DepthExceeded } outcome =
      Outcome::DepthExceeded;
  Classification final_class;
  std::optional<Value> result;  // base value of the main future, if any
};

inline constexpr std::size_t kDefaultMaxSteps = 10000;

Trace run(const Program& p, SchedulerPolicy policy, ForwardMode mode,
          std::size_t max_steps = kDefaultMaxSteps);

// ---------------------------------------------------------------------------
// exhaustive exploration
// ---------------------------------------------------------------------------

struct ExploreBounds {
  std::size_t max_states = 100000;
  std::size_t max_depth = 10000;
};

// Reads DEFCAL_MAX_STATES from the environment over the default.
ExploreBounds default_bounds();

struct Lts {
  std::vector<std::string> digests;   // canonical digest per state
  std::vector<Configuration> reps;    // canonical representative per state
  std::vector<bool> expanded;         // successors fully enumerated
  std::size_t initial = 0;
  struct Edge {
    std::uint32_t from;
    TransitionLabel label;
    std::uint32_t to;
  };
  std::vector<Edge> edges;
  bool truncated = false;

  std::size_t num_states() const { return digests.size(); }
};

Lts explore(const Program& p, ExploreBounds bounds, ForwardMode mode);

nlohmann::json to_json(const Lts& lts);

// ---------------------------------------------------------------------------
// whole-space checks over explored state spaces
// ---------------------------------------------------------------------------

struct CheckReport {
  bool ok = true;
  std::size_t states_checked = 0;
  std::string failure;  // first violation, rendered
};

// Every retained representative typechecks against the environment
// reconstructed from it.
CheckReport check_preservation(const Program& p, const Lts& lts,
                               ForwardMode mode);

// Every fully-expanded leaf is either terminated or has each running
// future blocked on a get* of an unresolved future (and each chained
// future waiting on an unresolved target).
CheckReport check_progress(const Program& p, const Lts& lts, ForwardMode mode);

}  // namespace defcal
