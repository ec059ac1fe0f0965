#pragma once

#include <map>
#include <optional>

#include <json.hpp>

#include "defcal/explore.hpp"

namespace defcal {

// Per-rule step counts of a single scheduled run.
struct RuleCounts {
  std::map<Rule, std::size_t> total;
  std::map<FutureId, std::map<Rule, std::size_t>> by_actor;
  std::size_t steps = 0;
  Trace::Outcome outcome = Trace::Outcome::DepthExceeded;
  std::optional<Value> result;

  std::size_t of(Rule r) const;
  std::size_t of(Rule r, FutureId actor) const;
};

RuleCounts count_rules(const Trace& t);

// Round-robin runs of the program as written and of its forward*-free
// translation, side by side. The program may already be forward*-free,
// in which case the two halves coincide.
struct StatsReport {
  RuleCounts forward_version;
  RuleCounts translated;
};

StatsReport delegation_stats(const Program& p, ForwardMode mode,
                             std::size_t max_steps = kDefaultMaxSteps);

nlohmann::json to_json(const RuleCounts& c);
nlohmann::json to_json(const StatsReport& s);

}  // namespace defcal
