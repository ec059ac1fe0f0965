#include "defcal/stats.hpp"

#include "defcal/transform.hpp"

namespace defcal {

std::size_t RuleCounts::of(Rule r) const {
  auto it = total.find(r);
  return it == total.end() ? 0 : it->second;
}

std::size_t RuleCounts::of(Rule r, FutureId actor) const {
  auto it = by_actor.find(actor);
  if (it == by_actor.end()) return 0;
  auto jt = it->second.find(r);
  return jt == it->second.end() ? 0 : jt->second;
}

RuleCounts count_rules(const Trace& t) {
  RuleCounts c;
  c.steps = t.steps.size();
  c.outcome = t.outcome;
  c.result = t.result;
  for (const auto& step : t.steps) {
    ++c.total[step.label.rule];
    ++c.by_actor[step.label.actor][step.label.rule];
  }
  return c;
}

StatsReport delegation_stats(const Program& p, ForwardMode mode,
                             std::size_t max_steps) {
  StatsReport s;
  s.forward_version = count_rules(
      run(p, SchedulerPolicy::round_robin(), mode, max_steps));
  if (contains_forward(p)) {
    FwdElimResult elim = fwd_elim(p);
    if (!elim.ok())
      throw RuntimeFault("program does not admit forward* elimination");
    s.translated = count_rules(
        run(*elim.program, SchedulerPolicy::round_robin(), mode, max_steps));
  } else {
    s.translated = s.forward_version;
  }
  return s;
}

namespace {

std::string outcome_name(Trace::Outcome o) {
  switch (o) {
    case Trace::Outcome::Terminated: return "terminated";
    case Trace::Outcome::Deadlocked: return "deadlocked";
    case Trace::Outcome::DepthExceeded: return "step-limit";
  }
  return "?";
}

}  // namespace

nlohmann::json to_json(const RuleCounts& c) {
  nlohmann::json rules = nlohmann::json::object();
  for (const auto& [r, n] : c.total) rules[to_string(r)] = n;
  nlohmann::json by_actor = nlohmann::json::object();
  for (const auto& [f, counts] : c.by_actor) {
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [r, n] : counts) per[to_string(r)] = n;
    by_actor["f" + std::to_string(f)] = std::move(per);
  }
  nlohmann::json out{{"rules", std::move(rules)},
                     {"by_actor", std::move(by_actor)},
                     {"steps", c.steps},
                     {"outcome", outcome_name(c.outcome)}};
  if (c.result && c.result->is_int())
    out["result"] = c.result->as_int();
  else if (c.result && c.result->is_bool())
    out["result"] = c.result->as_bool();
  return out;
}

nlohmann::json to_json(const StatsReport& s) {
  return nlohmann::json{{"forward", to_json(s.forward_version)},
                        {"translated", to_json(s.translated)}};
}

}  // namespace defcal
