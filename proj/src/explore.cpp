#include "defcal/explore.hpp"

#include <cstdlib>
#include <deque>
#include <random>
#include <set>
#include <unordered_map>

#include "defcal/config_typing.hpp"
#include "defcal/serialize.hpp"

namespace defcal {

// ---------------------------------------------------------------------------
// renaming and canonicalization
// ---------------------------------------------------------------------------

namespace {

FutureId renamed(const std::map<FutureId, FutureId>& map, FutureId f) {
  auto it = map.find(f);
  if (it == map.end())
    throw RuntimeFault("rename map misses future " + std::to_string(f));
  return it->second;
}

Value rename_value(const std::map<FutureId, FutureId>& map, const Value& w) {
  if (w.is_fut()) return Value::of_fut(renamed(map, w.as_fut()));
  return w;
}

Atom rename_atom(const std::map<FutureId, FutureId>& map, const Atom& a) {
  if (const auto* fut = std::get_if<FutLit>(&a.node))
    return fut_atom(renamed(map, fut->id));
  return a;
}

Rhs rename_rhs(const std::map<FutureId, FutureId>& map, const Rhs& r) {
  return std::visit(
      [&](const auto& n) -> Rhs {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr>) {
          if (const auto* b = std::get_if<BinOp>(&n.node))
            return Rhs{Expr{BinOp{rename_atom(map, b->lhs), b->op,
                                  rename_atom(map, b->rhs)}}};
          return Rhs{Expr{rename_atom(map, std::get<Atom>(n.node))}};
        } else if constexpr (std::is_same_v<T, SyncCall> ||
                             std::is_same_v<T, AsyncCall>) {
          T out = n;
          for (auto& a : out.args) a = rename_atom(map, a);
          return Rhs{std::move(out)};
        } else if constexpr (std::is_same_v<T, GetStar>) {
          return Rhs{GetStar{rename_atom(map, n.target)}};
        } else {
          return Rhs{n};
        }
      },
      r.node);
}

StmtPtr rename_stmt(const std::map<FutureId, FutureId>& map,
                    const StmtPtr& s) {
  return std::visit(
      [&](const auto& n) -> StmtPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Skip>) {
          return s;
        } else if constexpr (std::is_same_v<T, Assign>) {
          Rhs r = rename_rhs(map, n.rhs);
          if (r == n.rhs) return s;
          return make_stmt(Assign{n.target, std::move(r)}, s->loc);
        } else if constexpr (std::is_same_v<T, If>) {
          Atom c = rename_atom(map, n.cond);
          StmtPtr t = rename_stmt(map, n.then_branch);
          StmtPtr e = rename_stmt(map, n.else_branch);
          if (c == n.cond && t == n.then_branch && e == n.else_branch)
            return s;
          return make_stmt(If{std::move(c), std::move(t), std::move(e)},
                           s->loc);
        } else if constexpr (std::is_same_v<T, Seq>) {
          StmtPtr a = rename_stmt(map, n.first);
          StmtPtr b = rename_stmt(map, n.second);
          if (a == n.first && b == n.second) return s;
          return make_stmt(Seq{std::move(a), std::move(b)}, s->loc);
        } else if constexpr (std::is_same_v<T, Return>) {
          Atom v = rename_atom(map, n.value);
          if (v == n.value) return s;
          return make_stmt(Return{std::move(v)}, s->loc);
        } else {
          Atom v = rename_atom(map, n.value);
          if (v == n.value) return s;
          return make_stmt(ForwardStar{std::move(v)}, s->loc);
        }
      },
      s->node);
}

// every FutRef occurrence in a statement, pre-order
void scan_stmt(const StmtPtr& s, std::vector<FutureId>& out) {
  auto atom = [&](const Atom& a) {
    if (const auto* fut = std::get_if<FutLit>(&a.node)) out.push_back(fut->id);
  };
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assign>) {
          std::visit(
              [&](const auto& r) {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, Expr>) {
                  if (const auto* b = std::get_if<BinOp>(&r.node)) {
                    atom(b->lhs);
                    atom(b->rhs);
                  } else {
                    atom(std::get<Atom>(r.node));
                  }
                } else if constexpr (std::is_same_v<R, SyncCall> ||
                                     std::is_same_v<R, AsyncCall>) {
                  for (const auto& a : r.args) atom(a);
                } else if constexpr (std::is_same_v<R, GetStar>) {
                  atom(r.target);
                }
              },
              n.rhs.node);
        } else if constexpr (std::is_same_v<T, If>) {
          atom(n.cond);
          scan_stmt(n.then_branch, out);
          scan_stmt(n.else_branch, out);
        } else if constexpr (std::is_same_v<T, Seq>) {
          scan_stmt(n.first, out);
          scan_stmt(n.second, out);
        } else if constexpr (std::is_same_v<T, Return> ||
                             std::is_same_v<T, ForwardStar>) {
          atom(n.value);
        }
      },
      s->node);
}

std::vector<FutureId> scan_state(const FutureState& state) {
  std::vector<FutureId> out;
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, Unresolved>) {
          for (auto it = st.frames.rbegin(); it != st.frames.rend(); ++it) {
            for (const auto& [name, value] : it->locals) {
              (void)name;
              if (value.is_fut()) out.push_back(value.as_fut());
            }
            scan_stmt(it->stmt, out);
          }
        } else if constexpr (std::is_same_v<T, Resolved>) {
          if (st.value.is_fut()) out.push_back(st.value.as_fut());
        } else {
          out.push_back(st.target);
        }
      },
      state);
  return out;
}

}  // namespace

Configuration rename_futures(const Configuration& cn,
                             const std::map<FutureId, FutureId>& map) {
  Configuration out;
  out.next_id = cn.next_id;
  out.dialect = cn.dialect;
  for (const auto& [name, value] : cn.globals)
    out.globals.emplace(name, rename_value(map, value));
  for (const auto& [f, state] : cn.futures) {
    FutureState renamed_state = std::visit(
        [&](const auto& st) -> FutureState {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, Unresolved>) {
            Unresolved u;
            for (const auto& frame : st.frames) {
              Frame g;
              g.fn = frame.fn;
              g.stmt = rename_stmt(map, frame.stmt);
              for (const auto& [name, value] : frame.locals)
                g.locals.emplace(name, rename_value(map, value));
              u.frames.push_back(std::move(g));
            }
            return u;
          } else if constexpr (std::is_same_v<T, Resolved>) {
            return Resolved{rename_value(map, st.value)};
          } else {
            return Chained{renamed(map, st.target)};
          }
        },
        state);
    out.futures.emplace(renamed(map, f), std::move(renamed_state));
  }
  for (const auto& [f, b] : cn.result_base)
    out.result_base.emplace(renamed(map, f), b);
  return out;
}

Configuration canonicalize(const Configuration& cn) {
  std::vector<FutureId> order;
  std::set<FutureId> seen;
  auto push = [&](FutureId f) {
    if (cn.futures.contains(f) && seen.insert(f).second) order.push_back(f);
  };

  push(kMainFuture);
  for (const auto& [name, value] : cn.globals) {
    (void)name;
    if (value.is_fut()) push(value.as_fut());
  }
  std::size_t next = 0;
  auto drain = [&] {
    while (next < order.size()) {
      for (FutureId ref : scan_state(cn.futures.at(order[next]))) push(ref);
      ++next;
    }
  };
  drain();
  for (const auto& [f, state] : cn.futures) {
    (void)state;
    push(f);
    drain();
  }

  std::map<FutureId, FutureId> map;
  for (std::size_t i = 0; i < order.size(); ++i)
    map[order[i]] = static_cast<FutureId>(i);
  return rename_futures(cn, map);
}

// ---------------------------------------------------------------------------
// scheduled runs
// ---------------------------------------------------------------------------

namespace {

std::size_t pick_round_robin(
    const std::vector<std::pair<TransitionLabel, Configuration>>& enabled,
    std::int64_t last_actor) {
  // next actor after the previous one, cycling; enabled is actor-sorted
  for (std::size_t i = 0; i < enabled.size(); ++i)
    if (static_cast<std::int64_t>(enabled[i].first.actor) > last_actor)
      return i;
  return 0;
}

void check_step_invariants(const Configuration& before,
                           const Configuration& after,
                           const TransitionLabel& label) {
  if (after.next_id < before.next_id)
    throw RuntimeFault("future ids went backwards at " + to_string(label));
  for (const auto& [f, state] : before.futures) {
    auto it = after.futures.find(f);
    if (it == after.futures.end())
      throw RuntimeFault("future vanished at " + to_string(label));
    if (const auto* r = std::get_if<Resolved>(&state)) {
      const auto* r2 = std::get_if<Resolved>(&it->second);
      if (!r2 || !(r2->value == r->value))
        throw RuntimeFault("resolved future rewritten at " + to_string(label));
    }
  }
}

}  // namespace

Trace run(const Program& p, SchedulerPolicy policy, ForwardMode mode,
          std::size_t max_steps) {
  FunctionTable fns = FunctionTable::build(p);
  Trace trace;
  trace.initial = initial_configuration(p);
  Configuration cur = trace.initial;
  std::mt19937_64 rng(policy.seed);
  std::int64_t last_actor = -1;

  for (std::size_t step = 0; step < max_steps; ++step) {
    auto enabled = enabled_transitions(fns, cur, mode);
    if (enabled.empty()) {
      Classification cls = classify(fns, cur, mode);
      trace.final_class = cls;
      trace.outcome = cls.kind == Classification::Terminated
                          ? Trace::Outcome::Terminated
                          : Trace::Outcome::Deadlocked;
      trace.result = final_value(cur, kMainFuture);
      return trace;
    }
    std::size_t pick;
    if (policy.kind == SchedulerPolicy::RoundRobin) {
      pick = pick_round_robin(enabled, last_actor);
    } else {
      pick = std::uniform_int_distribution<std::size_t>(
          0, enabled.size() - 1)(rng);
    }
    auto& [label, next] = enabled[pick];
    check_step_invariants(cur, next, label);
    last_actor = label.actor;
    cur = std::move(next);
    trace.steps.push_back({label, cur});
  }
  trace.outcome = Trace::Outcome::DepthExceeded;
  trace.final_class = Classification{Classification::Running, {}};
  trace.result = final_value(cur, kMainFuture);
  return trace;
}

// ---------------------------------------------------------------------------
// exhaustive exploration
// ---------------------------------------------------------------------------

ExploreBounds default_bounds() {
  ExploreBounds bounds;
  if (const char* env = std::getenv("DEFCAL_MAX_STATES")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) bounds.max_states = v;
  }
  return bounds;
}

Lts explore(const Program& p, ExploreBounds bounds, ForwardMode mode) {
  FunctionTable fns = FunctionTable::build(p);
  Lts lts;
  std::unordered_map<std::string, std::uint32_t> index;

  // States are identified by the digest of their canonical form, but the
  // retained representative keeps the ids the scheduler allocated: labels
  // must name actors consistently along every path, and canonical renaming
  // shifts with the reference structure as get* rewrites operands.
  auto intern = [&](Configuration cn) -> std::optional<std::uint32_t> {
    std::string dig = digest(canonicalize(cn));
    if (auto it = index.find(dig); it != index.end()) return it->second;
    if (lts.num_states() >= bounds.max_states) return std::nullopt;
    auto id = static_cast<std::uint32_t>(lts.num_states());
    index.emplace(dig, id);
    lts.digests.push_back(std::move(dig));
    lts.reps.push_back(std::move(cn));
    lts.expanded.push_back(false);
    return id;
  };

  auto initial = intern(initial_configuration(p));
  if (!initial) {
    lts.truncated = true;
    return lts;
  }
  lts.initial = *initial;

  std::deque<std::pair<std::uint32_t, std::size_t>> frontier;  // state, depth
  frontier.push_back({*initial, 0});
  std::vector<bool> queued(1, true);

  while (!frontier.empty()) {
    auto [state, depth] = frontier.front();
    frontier.pop_front();
    if (depth >= bounds.max_depth) {
      lts.truncated = true;
      continue;
    }
    const Configuration rep = lts.reps[state];  // copy: reps may reallocate
    auto enabled = enabled_transitions(fns, rep, mode);
    bool complete = true;
    for (auto& [label, succ] : enabled) {
      check_step_invariants(rep, succ, label);
      auto target = intern(std::move(succ));
      if (!target) {
        lts.truncated = true;
        complete = false;
        continue;
      }
      lts.edges.push_back({state, label, *target});
      if (*target >= queued.size()) queued.resize(*target + 1, false);
      if (!queued[*target]) {
        queued[*target] = true;
        frontier.push_back({*target, depth + 1});
      }
    }
    lts.expanded[state] = complete;
  }
  return lts;
}

nlohmann::json to_json(const Lts& lts) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : lts.edges)
    edges.push_back(nlohmann::json::array(
        {e.from, to_string(e.label.rule), e.label.actor, e.to}));
  return nlohmann::json{{"states", lts.digests},
                        {"initial", lts.initial},
                        {"edges", std::move(edges)},
                        {"truncated", lts.truncated}};
}

// ---------------------------------------------------------------------------
// preservation / progress over an explored space
// ---------------------------------------------------------------------------

CheckReport check_preservation(const Program& p, const Lts& lts,
                               ForwardMode mode) {
  CheckReport report;
  for (std::size_t i = 0; i < lts.num_states(); ++i) {
    ConfigTypeEnv omega = canonical_omega(p, lts.reps[i]);
    auto errors = check_configuration(omega, p, lts.reps[i], mode);
    ++report.states_checked;
    if (!errors.empty()) {
      report.ok = false;
      report.failure =
          "state " + std::to_string(i) + ": " + render(errors.front());
      return report;
    }
  }
  return report;
}

CheckReport check_progress(const Program& p, const Lts& lts,
                           ForwardMode mode) {
  (void)mode;
  CheckReport report;
  std::vector<bool> has_out(lts.num_states(), false);
  for (const auto& e : lts.edges) has_out[e.from] = true;
  (void)p;
  for (std::size_t i = 0; i < lts.num_states(); ++i) {
    if (has_out[i] || !lts.expanded[i]) continue;
    ++report.states_checked;
    const Configuration& cn = lts.reps[i];
    for (const auto& [f, state] : cn.futures) {
      if (std::holds_alternative<Resolved>(state)) continue;
      if (!blocked_target(cn, state)) {
        report.ok = false;
        report.failure = "state " + std::to_string(i) + ": future f" +
                         std::to_string(f) +
                         " is quiescent but not blocked on a get*";
        return report;
      }
    }
  }
  return report;
}

}  // namespace defcal
