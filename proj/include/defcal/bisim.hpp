#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "defcal/explore.hpp"
#include "defcal/runtime.hpp"

namespace defcal {

// ---------------------------------------------------------------------------
// observation labels
// ---------------------------------------------------------------------------

// Fine labels carry the acting future id; Coarse drops it and compares
// by rule name only.
enum class LabelGranularity { Fine, Coarse };

// GET-FUTURE and CHAIN-UPDATE are the non-observable steps. FORWARD-ASYNC
// and FORWARD-DATA observe as RETURN-ASYNC, FORWARD-SYNC as RETURN-SYNC;
// every other rule observes as itself.
struct ObsLabel {
  bool is_tau = false;
  Rule rule = Rule::Skip;             // meaningful when !is_tau
  std::optional<FutureId> actor;      // absent under Coarse
  auto operator<=>(const ObsLabel&) const = default;
};

ObsLabel relabel(const TransitionLabel& l, LabelGranularity g);
std::string to_string(const ObsLabel& l);

struct ObsLts {
  std::size_t num_states = 0;
  std::size_t initial = 0;
  struct Edge {
    std::uint32_t from;
    ObsLabel label;
    std::uint32_t to;
  };
  std::vector<Edge> edges;
  bool truncated = false;
};

ObsLts relabel(const Lts& lts, LabelGranularity g);

// ---------------------------------------------------------------------------
// branching bisimilarity
// ---------------------------------------------------------------------------

struct BisimVerdict {
  bool bisimilar = false;
  // On a negative verdict, a pair of states (left LTS, right LTS) the
  // distinguishing sequence separates; on a positive one, the initials.
  std::pair<std::uint32_t, std::uint32_t> pair{0, 0};
  // Shortest observable sequence weakly replayable on exactly one side.
  // Empty on a negative verdict when the two LTSs are weak-trace
  // equivalent and differ only in branching structure (see note).
  std::vector<ObsLabel> witness;
  bool advisory = false;  // some input was truncated, or no trace witness
  std::string note;       // human-readable detail, not serialized
};

// Coarsest divergence-insensitive branching bisimulation on the
// disjoint union of the two LTSs, by tau-SCC condensation followed by
// signature refinement. Verdict compares the blocks of the initials.
BisimVerdict branching_bisimilar(const ObsLts& f, const ObsLts& d);

// {"verdict":…, "witness":[…], "pair":[i,j], "advisory":…}
nlohmann::json to_json(const BisimVerdict& v);

// Weak replay: follow the sequence through tau-closed subsets; returns
// the number of labels consumed before getting stuck (== size on full
// replay).
std::size_t weak_replay(const ObsLts& lts, const std::vector<ObsLabel>& seq);

// True when some cycle consists purely of tau edges (a state that can
// spin on GET-FUTURE/CHAIN-UPDATE forever).
bool has_tau_cycle(const ObsLts& lts);

// ---------------------------------------------------------------------------
// the relation between a forward* execution and its translated one
// ---------------------------------------------------------------------------

// Membership test for the simulation relation between a configuration
// of a forward* program (left) and one of its return-only translation
// (right), taken at matching points of lockstep executions so future
// ids coincide. Holds when the stores agree, every chained future on
// the left is resolved to that same future on the right, resolved
// values agree up to walking the right side's chain of futures, and
// matching task stacks are equal modulo forward* elimination except
// for a leading get* whose operands are stages of a common chain.
bool in_relation_r(const Configuration& cnF, const Configuration& cnD,
                   std::string* why = nullptr);

struct RCheckResult {
  bool ok = true;
  std::size_t pairs_checked = 0;
  bool truncated = false;  // pair budget exhausted before closure
  std::string counterexample;
  // Every matched pair visited, for lemma-level property checks.
  std::vector<std::pair<Configuration, Configuration>> pairs;
};

// Verifies directly that the relation is a branching bisimulation
// between the two programs' executions: starting from the initial
// pair (plus any extra seeds), every tau step on either side keeps the
// pair related, and every observable step is answered by tau* then the
// same observation on the other side, landing on a related pair.
RCheckResult check_r_is_bisimulation(
    const Program& pF, const Program& pD,
    const std::vector<std::pair<Configuration, Configuration>>& sample_pairs =
        {},
    std::size_t max_pairs = 100000);

// ---------------------------------------------------------------------------
// per-pair structural properties of the relation
// ---------------------------------------------------------------------------

struct LemmaResult {
  int lemma = 0;  // 1..6
  bool ok = true;
  std::size_t checked = 0;  // individual assertions evaluated
  std::string detail;       // first violation
};

// Checks, over a set of matched configuration pairs:
//   1. a chained future on the left is resolved to the same future on
//      the right;
//   2. a resolved future on the left heads a right-side chain reaching
//      the same value, every link of which is resolved to that value
//      on the left;
//   3. a resolved future on the right is either chained to its value
//      on the left or satisfies the shape of 2;
//   4. matching task stacks agree modulo forward* elimination, up to a
//      leading get* at different stages of the same chain;
//   5. along any right-side chain ending in a base value, each link is
//      on the left either resolved to that final value or linked to a
//      strictly later member of the chain;
//   6. whenever following links on the left reaches a base value,
//      following links on the right reaches the same value.
std::vector<LemmaResult> check_lemmas(
    const std::vector<std::pair<Configuration, Configuration>>& pairs);

}  // namespace defcal
