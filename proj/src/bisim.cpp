#include "defcal/bisim.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "defcal/serialize.hpp"
#include "defcal/transform.hpp"

namespace defcal {

// ---------------------------------------------------------------------------
// labels
// ---------------------------------------------------------------------------

ObsLabel relabel(const TransitionLabel& l, LabelGranularity g) {
  ObsLabel out;
  switch (l.rule) {
    case Rule::GetFuture:
    case Rule::ChainUpdate:
      out.is_tau = true;
      return out;
    case Rule::ForwardAsync:
    case Rule::ForwardData:
      out.rule = Rule::ReturnAsync;
      break;
    case Rule::ForwardSync:
      out.rule = Rule::ReturnSync;
      break;
    default:
      out.rule = l.rule;
      break;
  }
  if (g == LabelGranularity::Fine) out.actor = l.actor;
  return out;
}

std::string to_string(const ObsLabel& l) {
  if (l.is_tau) return "tau";
  std::string s = to_string(l.rule);
  if (l.actor) s += "@f" + std::to_string(*l.actor);
  return s;
}

ObsLts relabel(const Lts& lts, LabelGranularity g) {
  ObsLts out;
  out.num_states = lts.num_states();
  out.initial = lts.initial;
  out.truncated = lts.truncated;
  out.edges.reserve(lts.edges.size());
  for (const auto& e : lts.edges)
    out.edges.push_back({e.from, relabel(e.label, g), e.to});
  return out;
}

// ---------------------------------------------------------------------------
// branching bisimilarity by tau-SCC condensation + signature refinement
// ---------------------------------------------------------------------------

namespace {

// Tarjan over the tau-subgraph; SCC ids come out in reverse topological
// order (every tau-successor SCC gets a smaller id).
std::pair<std::vector<int>, int> tau_sccs(
    std::size_t n, const std::vector<std::vector<int>>& tau_adj) {
  std::vector<int> idx(n, -1), low(n, 0), scc(n, -1);
  std::vector<bool> onstack(n, false);
  std::vector<int> stk;
  int counter = 0, scc_count = 0;

  struct DfsFrame {
    int v;
    std::size_t ci;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (idx[root] != -1) continue;
    std::vector<DfsFrame> frames{{static_cast<int>(root), 0}};
    idx[root] = low[root] = counter++;
    stk.push_back(static_cast<int>(root));
    onstack[root] = true;
    while (!frames.empty()) {
      auto& fr = frames.back();
      if (fr.ci < tau_adj[fr.v].size()) {
        int w = tau_adj[fr.v][fr.ci++];
        if (idx[w] == -1) {
          idx[w] = low[w] = counter++;
          stk.push_back(w);
          onstack[w] = true;
          frames.push_back({w, 0});
        } else if (onstack[w]) {
          low[fr.v] = std::min(low[fr.v], idx[w]);
        }
      } else {
        if (low[fr.v] == idx[fr.v]) {
          for (;;) {
            int u = stk.back();
            stk.pop_back();
            onstack[u] = false;
            scc[u] = scc_count;
            if (u == fr.v) break;
          }
          ++scc_count;
        }
        int v = fr.v;
        frames.pop_back();
        if (!frames.empty())
          low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }
  return {scc, scc_count};
}

struct UnionLts {
  std::size_t n = 0;
  std::vector<ObsLts::Edge> edges;
  std::uint32_t init_f = 0, init_d = 0;
};

UnionLts disjoint_union(const ObsLts& f, const ObsLts& d) {
  UnionLts u;
  u.n = f.num_states + d.num_states;
  u.init_f = static_cast<std::uint32_t>(f.initial);
  u.init_d = static_cast<std::uint32_t>(f.num_states + d.initial);
  u.edges = f.edges;
  auto off = static_cast<std::uint32_t>(f.num_states);
  for (const auto& e : d.edges)
    u.edges.push_back({e.from + off, e.label, e.to + off});
  return u;
}

// Coarsest divergence-insensitive branching bisimulation as a block id
// per state.
std::vector<int> bisim_blocks(const UnionLts& u) {
  std::vector<std::vector<int>> tau_adj(u.n);
  for (const auto& e : u.edges)
    if (e.label.is_tau) tau_adj[e.from].push_back(e.to);
  auto [scc, m] = tau_sccs(u.n, tau_adj);

  // condensed edges; inert tau edges (inside one SCC) drop out
  std::vector<std::vector<std::pair<ObsLabel, int>>> cond(m);
  {
    std::set<std::tuple<int, ObsLabel, int>> seen;
    for (const auto& e : u.edges) {
      int cu = scc[e.from], cv = scc[e.to];
      if (e.label.is_tau && cu == cv) continue;
      if (seen.insert({cu, e.label, cv}).second)
        cond[cu].push_back({e.label, cv});
    }
  }

  std::vector<int> block(m, 0);
  for (;;) {
    // ascending SCC id = tau-successors first, so signatures of
    // same-block tau-successors are complete when inherited
    std::vector<std::set<std::pair<ObsLabel, int>>> sigs(m);
    for (int c = 0; c < m; ++c) {
      for (const auto& [lab, t] : cond[c]) {
        if (lab.is_tau && block[t] == block[c])
          sigs[c].insert(sigs[t].begin(), sigs[t].end());
        else
          sigs[c].insert({lab, block[t]});
      }
    }
    std::map<std::pair<int, std::set<std::pair<ObsLabel, int>>>, int> renum;
    std::vector<int> next(m);
    for (int c = 0; c < m; ++c) {
      auto key = std::make_pair(block[c], sigs[c]);
      auto [it, fresh] =
          renum.emplace(std::move(key), static_cast<int>(renum.size()));
      (void)fresh;
      next[c] = it->second;
    }
    if (next == block) break;
    block = std::move(next);
  }

  std::vector<int> per_state(u.n);
  for (std::size_t s = 0; s < u.n; ++s) per_state[s] = block[scc[s]];
  return per_state;
}

// --- determinized weak-language witness search ---

struct SideAdj {
  std::vector<std::vector<int>> tau;
  std::vector<std::vector<std::pair<ObsLabel, int>>> obs;
};

SideAdj side_adj(const ObsLts& lts) {
  SideAdj a;
  a.tau.resize(lts.num_states);
  a.obs.resize(lts.num_states);
  for (const auto& e : lts.edges) {
    if (e.label.is_tau)
      a.tau[e.from].push_back(e.to);
    else
      a.obs[e.from].push_back({e.label, e.to});
  }
  return a;
}

std::vector<int> closure(const SideAdj& a, std::vector<int> set) {
  std::set<int> seen(set.begin(), set.end());
  std::deque<int> work(set.begin(), set.end());
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    for (int t : a.tau[s])
      if (seen.insert(t).second) work.push_back(t);
  }
  return {seen.begin(), seen.end()};
}

std::vector<int> weak_move(const SideAdj& a, const std::vector<int>& from,
                           const ObsLabel& lab) {
  std::vector<int> hit;
  for (int s : from)
    for (const auto& [l, t] : a.obs[s])
      if (l == lab) hit.push_back(t);
  if (hit.empty()) return {};
  return closure(a, std::move(hit));
}

std::string subset_key(const std::vector<int>& sf, const std::vector<int>& sd) {
  std::string k;
  for (int s : sf) k += std::to_string(s) + ",";
  k += "|";
  for (int s : sd) k += std::to_string(s) + ",";
  return k;
}

struct WitnessSearch {
  bool found = false;
  std::vector<ObsLabel> labels;
  std::pair<std::uint32_t, std::uint32_t> pair{0, 0};
};

WitnessSearch find_trace_witness(const ObsLts& f, const ObsLts& d) {
  SideAdj af = side_adj(f), ad = side_adj(d);
  std::set<ObsLabel> alphabet;
  for (const auto& e : f.edges)
    if (!e.label.is_tau) alphabet.insert(e.label);
  for (const auto& e : d.edges)
    if (!e.label.is_tau) alphabet.insert(e.label);

  using Pair = std::pair<std::vector<int>, std::vector<int>>;
  Pair start{closure(af, {static_cast<int>(f.initial)}),
             closure(ad, {static_cast<int>(d.initial)})};
  std::map<std::string, std::pair<std::string, ObsLabel>> parent;
  std::set<std::string> visited{subset_key(start.first, start.second)};
  std::deque<std::pair<std::string, Pair>> work{
      {subset_key(start.first, start.second), start}};

  WitnessSearch out;
  while (!work.empty()) {
    auto [key, cur] = work.front();
    work.pop_front();
    for (const ObsLabel& lab : alphabet) {
      auto nf = weak_move(af, cur.first, lab);
      auto nd = weak_move(ad, cur.second, lab);
      if (nf.empty() && nd.empty()) continue;
      if (nf.empty() || nd.empty()) {
        out.found = true;
        out.pair = {static_cast<std::uint32_t>(cur.first.front()),
                    static_cast<std::uint32_t>(cur.second.front())};
        // path back to the root, then the separating label
        std::vector<ObsLabel> rev{lab};
        std::string at = key;
        for (auto it = parent.find(at); it != parent.end();
             it = parent.find(at)) {
          rev.push_back(it->second.second);
          at = it->second.first;
        }
        out.labels.assign(rev.rbegin(), rev.rend());
        return out;
      }
      std::string nk = subset_key(nf, nd);
      if (visited.insert(nk).second) {
        parent.emplace(nk, std::make_pair(key, lab));
        work.push_back({nk, Pair{std::move(nf), std::move(nd)}});
      }
    }
  }
  return out;
}

}  // namespace

bool has_tau_cycle(const ObsLts& lts) {
  std::vector<std::vector<int>> tau_adj(lts.num_states);
  for (const auto& e : lts.edges) {
    if (!e.label.is_tau) continue;
    if (e.from == e.to) return true;
    tau_adj[e.from].push_back(e.to);
  }
  auto [scc, m] = tau_sccs(lts.num_states, tau_adj);
  std::vector<int> size(m, 0);
  for (std::size_t s = 0; s < lts.num_states; ++s)
    if (++size[scc[s]] > 1) return true;
  return false;
}

std::size_t weak_replay(const ObsLts& lts, const std::vector<ObsLabel>& seq) {
  SideAdj a = side_adj(lts);
  std::vector<int> cur = closure(a, {static_cast<int>(lts.initial)});
  std::size_t consumed = 0;
  for (const ObsLabel& lab : seq) {
    cur = weak_move(a, cur, lab);
    if (cur.empty()) break;
    ++consumed;
  }
  return consumed;
}

BisimVerdict branching_bisimilar(const ObsLts& f, const ObsLts& d) {
  UnionLts u = disjoint_union(f, d);
  std::vector<int> block = bisim_blocks(u);

  BisimVerdict v;
  v.bisimilar = block[u.init_f] == block[u.init_d];
  v.pair = {static_cast<std::uint32_t>(f.initial),
            static_cast<std::uint32_t>(d.initial)};
  if (f.truncated || d.truncated) {
    v.advisory = true;
    v.note = "verdict computed on a truncated state space";
  }
  if (!v.bisimilar) {
    WitnessSearch w = find_trace_witness(f, d);
    if (w.found) {
      v.witness = std::move(w.labels);
      v.pair = w.pair;
    } else {
      v.advisory = true;
      if (!v.note.empty()) v.note += "; ";
      v.note +=
          "the two systems are weak-trace equivalent: the distinction is "
          "branching-structural and has no linear witness";
    }
  }
  return v;
}

nlohmann::json to_json(const BisimVerdict& v) {
  nlohmann::json witness = nlohmann::json::array();
  for (const auto& l : v.witness) witness.push_back(to_string(l));
  return nlohmann::json{
      {"verdict", v.bisimilar ? "bisimilar" : "not_bisimilar"},
      {"witness", std::move(witness)},
      {"pair", nlohmann::json::array({v.pair.first, v.pair.second})},
      {"advisory", v.advisory}};
}

// ---------------------------------------------------------------------------
// the relation on lockstep configurations
// ---------------------------------------------------------------------------

namespace {

std::string fmt_future(FutureId f) { return "f" + std::to_string(f); }

bool fail(std::string* why, std::string msg) {
  if (why) *why = std::move(msg);
  return false;
}

// Left-side resolved value w against the right side's chain from f:
// walk right-side resolved links from f until the value w shows up;
// every link passed must itself be resolved to w on the left.
bool chain_matches_value(const Configuration& cnF, const Configuration& cnD,
                         FutureId f, const Value& w, std::string* why) {
  std::set<FutureId> visited;
  FutureId u = f;
  for (;;) {
    if (!visited.insert(u).second)
      return fail(why, fmt_future(f) + ": right-side chain cycles before " +
                           "reaching the left-side value");
    auto it = cnD.futures.find(u);
    if (it == cnD.futures.end() ||
        !std::holds_alternative<Resolved>(it->second))
      return fail(why, fmt_future(f) + ": right-side chain breaks at " +
                           fmt_future(u));
    const Value& v = std::get<Resolved>(it->second).value;
    if (v == w) return true;
    if (!v.is_fut())
      return fail(why, fmt_future(f) + ": right side resolves to " +
                           to_string(v) + " but left holds " + to_string(w));
    FutureId g = v.as_fut();
    auto fit = cnF.futures.find(g);
    if (fit == cnF.futures.end() ||
        !std::holds_alternative<Resolved>(fit->second) ||
        !(std::get<Resolved>(fit->second).value == w))
      return fail(why, fmt_future(f) + ": chain member " + fmt_future(g) +
                           " is not resolved to " + to_string(w) +
                           " on the left");
    u = g;
  }
}

// Futures that reach u through resolved future-valued links.
std::set<FutureId> resolved_ancestors(const Configuration& cn, FutureId u) {
  std::map<FutureId, std::vector<FutureId>> rev;
  for (const auto& [f, state] : cn.futures)
    if (const auto* r = std::get_if<Resolved>(&state))
      if (r->value.is_fut()) rev[r->value.as_fut()].push_back(f);
  std::set<FutureId> seen{u};
  std::deque<FutureId> work{u};
  while (!work.empty()) {
    FutureId s = work.front();
    work.pop_front();
    auto it = rev.find(s);
    if (it == rev.end()) continue;
    for (FutureId p : it->second)
      if (seen.insert(p).second) work.push_back(p);
  }
  return seen;
}

// get* operands at different stages of resolving the same chain
bool operands_match(const Configuration& cnF, const Store& localsF,
                    const Atom& opF, const Configuration& cnD,
                    const Store& localsD, const Atom& opD) {
  Value wF = eval(cnF.globals, localsF, opF);
  Value wD = eval(cnD.globals, localsD, opD);
  if (wF.is_base() && wD.is_base()) return wF == wD;
  if (wF.is_base()) {
    auto v = final_value(cnD, wD.as_fut());
    return v && *v == wF;
  }
  if (wD.is_base()) {
    auto v = final_value(cnF, wF.as_fut());
    return v && *v == wD;
  }
  std::set<FutureId> ancF = resolved_ancestors(cnF, wF.as_fut());
  std::set<FutureId> ancD = resolved_ancestors(cnD, wD.as_fut());
  return std::any_of(ancF.begin(), ancF.end(),
                     [&](FutureId a) { return ancD.count(a) > 0; });
}

struct GetHead {
  const Assign* assign;
  const GetStar* get;
  StmtPtr tail;
};

std::optional<GetHead> leading_get(const StmtPtr& s) {
  auto [head, tail] = split_head(s);
  const auto* assign = std::get_if<Assign>(&head->node);
  if (!assign) return std::nullopt;
  const auto* get = std::get_if<GetStar>(&assign->rhs.node);
  if (!get) return std::nullopt;
  return GetHead{assign, get, tail};
}

bool match_tasks(const Configuration& cnF, const Configuration& cnD,
                 FutureId f, const Unresolved& uf, const Unresolved& ud,
                 std::string* why) {
  if (uf.frames.size() != ud.frames.size())
    return fail(why, fmt_future(f) + ": frame stacks have different depths");
  for (std::size_t i = 0; i < uf.frames.size(); ++i) {
    const Frame& gf = uf.frames[i];
    const Frame& gd = ud.frames[i];
    if (gf.fn != gd.fn)
      return fail(why, fmt_future(f) + ": frame " + std::to_string(i) +
                           " runs " + gf.fn + " vs " + gd.fn);
    if (!(gf.locals == gd.locals))
      return fail(why, fmt_future(f) + ": locals differ in frame " +
                           std::to_string(i) + " (" + gf.fn + ")");
    if (stmt_equal(fwd_elim_stmt(gf.stmt), gd.stmt)) continue;
    bool top = i + 1 == uf.frames.size();
    if (top) {
      auto hf = leading_get(gf.stmt);
      auto hd = leading_get(gd.stmt);
      if (hf && hd && hf->assign->target == hd->assign->target &&
          stmt_equal(fwd_elim_stmt(hf->tail), hd->tail) &&
          operands_match(cnF, gf.locals, hf->get->target, cnD, gd.locals,
                         hd->get->target))
        continue;
    }
    return fail(why, fmt_future(f) + ": statements of frame " +
                         std::to_string(i) +
                         " differ beyond forward* elimination");
  }
  return true;
}

}  // namespace

bool in_relation_r(const Configuration& cnF, const Configuration& cnD,
                   std::string* why) {
  if (cnF.next_id != cnD.next_id)
    return fail(why, "future id counters differ");
  if (!(cnF.globals == cnD.globals))
    return fail(why, "global stores differ");
  if (cnF.futures.size() != cnD.futures.size())
    return fail(why, "future sets differ");
  for (auto itF = cnF.futures.begin(), itD = cnD.futures.begin();
       itF != cnF.futures.end(); ++itF, ++itD) {
    if (itF->first != itD->first)
      return fail(why, "future sets differ at " + fmt_future(itF->first) +
                           " vs " + fmt_future(itD->first));
    FutureId f = itF->first;
    const FutureState& sf = itF->second;
    const FutureState& sd = itD->second;
    if (const auto* uf = std::get_if<Unresolved>(&sf)) {
      const auto* ud = std::get_if<Unresolved>(&sd);
      if (!ud)
        return fail(why, fmt_future(f) +
                             ": task still runs on the left but not on the "
                             "right");
      if (!match_tasks(cnF, cnD, f, *uf, *ud, why)) return false;
    } else if (const auto* cf = std::get_if<Chained>(&sf)) {
      const auto* rd = std::get_if<Resolved>(&sd);
      if (!rd || !(rd->value == Value::of_fut(cf->target)))
        return fail(why, fmt_future(f) + ": chained to " +
                             fmt_future(cf->target) +
                             " on the left but the right is not resolved to "
                             "that future");
    } else {
      const auto& rf = std::get<Resolved>(sf);
      if (!std::holds_alternative<Resolved>(sd))
        return fail(why, fmt_future(f) +
                             ": resolved on the left but not on the right");
      if (!chain_matches_value(cnF, cnD, f, rf.value, why)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// direct check that the relation is a branching bisimulation
// ---------------------------------------------------------------------------

namespace {

std::string pair_key(const Configuration& a, const Configuration& b) {
  return digest(a) + ":" + digest(b);
}

// tau-closure search on one side for an answering observable step
bool find_answer(const FunctionTable& fns, const Configuration& from,
                 const ObsLabel& want, ForwardMode mode,
                 std::vector<Configuration>& answers) {
  std::set<std::string> seen{digest(from)};
  std::deque<Configuration> work{from};
  while (!work.empty()) {
    Configuration cur = std::move(work.front());
    work.pop_front();
    for (auto& [lab, succ] : enabled_transitions(fns, cur, mode)) {
      ObsLabel rel = relabel(lab, LabelGranularity::Fine);
      if (rel.is_tau) {
        if (seen.insert(digest(succ)).second) work.push_back(std::move(succ));
      } else if (rel == want) {
        answers.push_back(std::move(succ));
      }
    }
  }
  return !answers.empty();
}

}  // namespace

RCheckResult check_r_is_bisimulation(
    const Program& pF, const Program& pD,
    const std::vector<std::pair<Configuration, Configuration>>& sample_pairs,
    std::size_t max_pairs) {
  constexpr ForwardMode mode = ForwardMode::Strict;
  FunctionTable fF = FunctionTable::build(pF);
  FunctionTable fD = FunctionTable::build(pD);

  RCheckResult res;
  std::deque<std::pair<Configuration, Configuration>> work;
  std::set<std::string> visited;

  auto push = [&](Configuration a, Configuration b) {
    if (res.pairs.size() >= max_pairs) {
      res.truncated = true;
      return;
    }
    if (visited.insert(pair_key(a, b)).second)
      work.push_back({std::move(a), std::move(b)});
  };

  push(initial_configuration(pF), initial_configuration(pD));
  for (const auto& [a, b] : sample_pairs) push(a, b);

  auto flunk = [&](const std::string& msg) {
    res.ok = false;
    res.counterexample = msg;
  };

  while (!work.empty() && res.ok) {
    auto [cF, cD] = std::move(work.front());
    work.pop_front();
    res.pairs.push_back({cF, cD});
    ++res.pairs_checked;

    std::string why;
    if (!in_relation_r(cF, cD, &why)) {
      flunk("matched pair leaves the relation: " + why);
      break;
    }

    for (auto& [lab, succ] : enabled_transitions(fF, cF, mode)) {
      ObsLabel rel = relabel(lab, LabelGranularity::Fine);
      if (rel.is_tau) {
        if (!in_relation_r(succ, cD, &why)) {
          flunk("left tau step " + to_string(lab) +
                " leaves the relation: " + why);
          break;
        }
        push(std::move(succ), cD);
      } else {
        std::vector<Configuration> answers;
        if (!find_answer(fD, cD, rel, mode, answers)) {
          flunk("left observable " + to_string(lab) +
                " has no tau*-then-matching answer on the right");
          break;
        }
        bool related = false;
        for (auto& ans : answers) {
          if (in_relation_r(succ, ans, &why)) {
            related = true;
            push(succ, std::move(ans));
          }
        }
        if (!related) {
          flunk("left observable " + to_string(lab) +
                " is answered on the right but no answer stays related: " +
                why);
          break;
        }
      }
    }
    if (!res.ok) break;

    for (auto& [lab, succ] : enabled_transitions(fD, cD, mode)) {
      ObsLabel rel = relabel(lab, LabelGranularity::Fine);
      if (rel.is_tau) {
        if (!in_relation_r(cF, succ, &why)) {
          flunk("right tau step " + to_string(lab) +
                " leaves the relation: " + why);
          break;
        }
        push(cF, std::move(succ));
      } else {
        std::vector<Configuration> answers;
        if (!find_answer(fF, cF, rel, mode, answers)) {
          flunk("right observable " + to_string(lab) +
                " has no tau*-then-matching answer on the left");
          break;
        }
        bool related = false;
        for (auto& ans : answers) {
          if (in_relation_r(ans, succ, &why)) {
            related = true;
            push(std::move(ans), succ);
          }
        }
        if (!related) {
          flunk("right observable " + to_string(lab) +
                " is answered on the left but no answer stays related: " +
                why);
          break;
        }
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// structural properties over matched pairs
// ---------------------------------------------------------------------------

namespace {

using PairVec = std::vector<std::pair<Configuration, Configuration>>;

LemmaResult lemma1(const PairVec& pairs) {
  LemmaResult r{1, true, 0, ""};
  for (const auto& [cF, cD] : pairs) {
    for (const auto& [f, sf] : cF.futures) {
      const auto* ch = std::get_if<Chained>(&sf);
      if (!ch) continue;
      ++r.checked;
      auto it = cD.futures.find(f);
      const auto* rd =
          it == cD.futures.end() ? nullptr : std::get_if<Resolved>(&it->second);
      if (!rd || !(rd->value == Value::of_fut(ch->target))) {
        r.ok = false;
        r.detail = fmt_future(f) + " chained to " + fmt_future(ch->target) +
                   " on the left lacks the matching resolved future on the "
                   "right";
        return r;
      }
    }
  }
  return r;
}

LemmaResult lemma2(const PairVec& pairs) {
  LemmaResult r{2, true, 0, ""};
  for (const auto& [cF, cD] : pairs) {
    for (const auto& [f, sf] : cF.futures) {
      const auto* rf = std::get_if<Resolved>(&sf);
      if (!rf) continue;
      ++r.checked;
      std::string why;
      if (!chain_matches_value(cF, cD, f, rf->value, &why)) {
        r.ok = false;
        r.detail = why;
        return r;
      }
    }
  }
  return r;
}

LemmaResult lemma3(const PairVec& pairs) {
  LemmaResult r{3, true, 0, ""};
  for (const auto& [cF, cD] : pairs) {
    for (const auto& [f, sd] : cD.futures) {
      const auto* rd = std::get_if<Resolved>(&sd);
      if (!rd) continue;
      ++r.checked;
      auto it = cF.futures.find(f);
      if (it == cF.futures.end()) {
        r.ok = false;
        r.detail = fmt_future(f) + " missing on the left";
        return r;
      }
      if (const auto* ch = std::get_if<Chained>(&it->second)) {
        if (rd->value == Value::of_fut(ch->target)) continue;
        r.ok = false;
        r.detail = fmt_future(f) + " chained to " + fmt_future(ch->target) +
                   " on the left but resolved to " + to_string(rd->value) +
                   " on the right";
        return r;
      }
      const auto* rf = std::get_if<Resolved>(&it->second);
      std::string why;
      if (!rf || !chain_matches_value(cF, cD, f, rf->value, &why)) {
        r.ok = false;
        r.detail = rf ? why
                      : fmt_future(f) +
                            " resolved on the right but still running on the "
                            "left";
        return r;
      }
    }
  }
  return r;
}

LemmaResult lemma4(const PairVec& pairs) {
  LemmaResult r{4, true, 0, ""};
  for (const auto& [cF, cD] : pairs) {
    for (const auto& [f, sf] : cF.futures) {
      const auto* uf = std::get_if<Unresolved>(&sf);
      auto it = cD.futures.find(f);
      const auto* ud = it == cD.futures.end()
                           ? nullptr
                           : std::get_if<Unresolved>(&it->second);
      if (!uf && !ud) continue;
      ++r.checked;
      if (!uf || !ud) {
        r.ok = false;
        r.detail = fmt_future(f) + " has a task on only one side";
        return r;
      }
      std::string why;
      if (!match_tasks(cF, cD, f, *uf, *ud, &why)) {
        r.ok = false;
        r.detail = why;
        return r;
      }
    }
  }
  return r;
}

LemmaResult lemma5(const PairVec& pairs) {
  LemmaResult r{5, true, 0, ""};
  for (const auto& [cF, cD] : pairs) {
    for (const auto& [start, sd] : cD.futures) {
      if (!std::holds_alternative<Resolved>(sd)) continue;
      // right-side chain from `start`; only chains ending in a base
      // value constrain the left side
      std::vector<FutureId> members{start};
      std::set<FutureId> seen{start};
      std::optional<Value> terminal;
      FutureId u = start;
      for (;;) {
        auto it = cD.futures.find(u);
        const auto* rd =
            it == cD.futures.end() ? nullptr : std::get_if<Resolved>(&it->second);
        if (!rd) break;
        if (rd->value.is_base()) {
          terminal = rd->value;
          break;
        }
        u = rd->value.as_fut();
        if (!seen.insert(u).second) break;
        members.push_back(u);
      }
      if (!terminal) continue;
      ++r.checked;
      for (std::size_t i = 0; i < members.size(); ++i) {
        FutureId m = members[i];
        auto fit = cF.futures.find(m);
        if (fit == cF.futures.end()) {
          r.ok = false;
          r.detail = fmt_future(m) + " missing on the left";
          return r;
        }
        std::optional<FutureId> link;
        bool at_terminal = false;
        if (const auto* rf = std::get_if<Resolved>(&fit->second)) {
          if (rf->value == *terminal)
            at_terminal = true;
          else if (rf->value.is_fut())
            link = rf->value.as_fut();
        } else if (const auto* ch = std::get_if<Chained>(&fit->second)) {
          link = ch->target;
        }
        bool later = false;
        if (link)
          for (std::size_t j = i + 1; j < members.size() && !later; ++j)
            later = members[j] == *link;
        if (!at_terminal && !later) {
          r.ok = false;
          r.detail = "chain member " + fmt_future(m) +
                     " on the left is neither resolved to " +
                     to_string(*terminal) +
                     " nor linked to a later member of the chain";
          return r;
        }
      }
    }
  }
  return r;
}

LemmaResult lemma6(const PairVec& pairs) {
  LemmaResult r{6, true, 0, ""};
  for (const auto& [cF, cD] : pairs) {
    for (const auto& [f, sf] : cF.futures) {
      (void)sf;
      auto wF = final_value(cF, f);
      if (!wF) continue;
      ++r.checked;
      auto wD = final_value(cD, f);
      if (!wD || !(*wD == *wF)) {
        r.ok = false;
        r.detail = "links from " + fmt_future(f) + " reach " + to_string(*wF) +
                   " on the left but " + (wD ? to_string(*wD) : "no value") +
                   " on the right";
        return r;
      }
    }
  }
  return r;
}

}  // namespace

std::vector<LemmaResult> check_lemmas(const PairVec& pairs) {
  return {lemma1(pairs), lemma2(pairs), lemma3(pairs),
          lemma4(pairs), lemma5(pairs), lemma6(pairs)};
}

}  // namespace defcal
