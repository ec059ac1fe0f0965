// defcal — workbench driver: check, run, explore, fwdelim, bisim, stats.
//
// Exit codes: 0 success / affirmative verdict; 1 negative verdict (parse
// or type error, not bisimilar, deadlock under --expect-terminate);
// 2 usage or IO error; 3 bound truncation under --strict-bounds.

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "defcal/bisim.hpp"
#include "defcal/explore.hpp"
#include "defcal/parser.hpp"
#include "defcal/serialize.hpp"
#include "defcal/stats.hpp"
#include "defcal/transform.hpp"
#include "defcal/typecheck.hpp"

namespace {

using namespace defcal;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;
constexpr int kTruncated = 3;

struct Options {
  std::string file;
  std::string against;
  std::string out;
  std::string dialect;           // "", "def", "def+f"
  std::string mode = "strict";   // strict | flexible
  std::string labels = "fine";   // fine | coarse
  std::string format = "text";   // text | json
  std::optional<std::uint64_t> seed;
  std::size_t max_steps = kDefaultMaxSteps;
  std::size_t max_states = 0;  // 0 = default bounds
  std::size_t max_depth = 0;
  bool trace = false;
  bool expect_terminate = false;
  bool strict_bounds = false;
  bool check_preservation = false;
  bool check_progress = false;
  bool check_r = false;
};

ForwardMode mode_of(const Options& o) {
  return o.mode == "flexible" ? ForwardMode::Flexible : ForwardMode::Strict;
}

LabelGranularity labels_of(const Options& o) {
  return o.labels == "coarse" ? LabelGranularity::Coarse
                              : LabelGranularity::Fine;
}

ExploreBounds bounds_of(const Options& o) {
  ExploreBounds b = default_bounds();
  if (o.max_states) b.max_states = o.max_states;
  if (o.max_depth) b.max_depth = o.max_depth;
  return b;
}

std::optional<Dialect> forced_dialect(const Options& o, std::string& err) {
  if (o.dialect.empty()) return std::nullopt;
  if (o.dialect == "def") return Dialect::Def;
  if (o.dialect == "def+f") return Dialect::DefPlusF;
  err = "unknown dialect '" + o.dialect + "' (expected def or def+f)";
  return std::nullopt;
}

int load(const Options& o, const std::string& path, Program& out) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    return kUsage;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  std::string err;
  std::optional<Dialect> forced = forced_dialect(o, err);
  if (!err.empty()) {
    std::cerr << "error: " << err << "\n";
    return kUsage;
  }
  ParseResult parsed = parse_program(buf.str(), forced);
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors)
      std::cerr << render(e, path) << "\n";
    return kNegative;
  }
  out = std::move(*parsed.program);
  return kOk;
}

int load_checked(const Options& o, const std::string& path, Program& out,
                 TypeEnv* env = nullptr) {
  if (int rc = load(o, path, out); rc != kOk) return rc;
  CheckResult checked = check_program(out, mode_of(o));
  if (!checked.ok()) {
    for (const auto& e : checked.errors)
      std::cerr << render(e, path) << "\n";
    return kNegative;
  }
  if (env) *env = checked.env;
  return kOk;
}

std::string signature_of(const Signature& sig) {
  std::string s = "(";
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    if (i) s += ", ";
    s += to_string(sig.params[i]);
  }
  s += ") -> " + to_string(sig.ret);
  return s;
}

int write_or_print(const Options& o, const std::string& body) {
  if (o.out.empty()) {
    std::cout << body;
    return kOk;
  }
  std::ofstream f(o.out);
  if (!f) {
    std::cerr << "error: cannot write " << o.out << "\n";
    return kUsage;
  }
  f << body;
  return kOk;
}

// ---- check ----------------------------------------------------------------

int cmd_check(const Options& o) {
  Program p;
  TypeEnv env;
  if (int rc = load_checked(o, o.file, p, &env); rc != kOk) return rc;
  if (o.format == "json") {
    nlohmann::json globals = nlohmann::json::object();
    for (const auto& [name, t] : env.vars) globals[name] = to_string(t);
    nlohmann::json funs = nlohmann::json::object();
    for (const auto& [name, sig] : env.funs) funs[name] = signature_of(sig);
    std::cout << nlohmann::json{{"ok", true},
                                {"globals", std::move(globals)},
                                {"functions", std::move(funs)}}
                     .dump()
              << "\n";
    return kOk;
  }
  std::cout << "ok\n";
  for (const auto& [name, t] : env.vars)
    std::cout << "global " << name << ": " << to_string(t) << "\n";
  for (const auto& [name, sig] : env.funs)
    std::cout << "fun " << name << signature_of(sig) << "\n";
  return kOk;
}

// ---- run ------------------------------------------------------------------

int cmd_run(const Options& o) {
  Program p;
  if (int rc = load_checked(o, o.file, p); rc != kOk) return rc;

  SchedulerPolicy policy = o.seed ? SchedulerPolicy::random(*o.seed)
                                  : SchedulerPolicy::round_robin();
  Trace t = run(p, policy, mode_of(o), o.max_steps);

  if (o.trace) {
    std::cout << nlohmann::json{{"config", to_json(canonicalize(t.initial))}}
                     .dump()
              << "\n";
    for (const auto& step : t.steps)
      std::cout << nlohmann::json{{"label", to_string(step.label)},
                                  {"config",
                                   to_json(canonicalize(step.config))}}
                       .dump()
                << "\n";
  }

  std::string outcome = t.outcome == Trace::Outcome::Terminated ? "terminated"
                        : t.outcome == Trace::Outcome::Deadlocked
                            ? "deadlocked"
                            : "step-limit";
  if (o.format == "json") {
    nlohmann::json j{{"outcome", outcome}, {"steps", t.steps.size()}};
    if (o.seed) j["seed"] = *o.seed;
    if (t.result) j["result"] = to_json(*t.result);
    nlohmann::json waits = nlohmann::json::array();
    for (auto [a, b] : t.final_class.waits)
      waits.push_back(nlohmann::json::array({a, b}));
    j["waits"] = std::move(waits);
    std::cout << j.dump() << "\n";
  } else {
    if (o.seed) std::cout << "seed: " << *o.seed << "\n";
    std::cout << outcome;
    if (t.outcome == Trace::Outcome::Terminated && t.result)
      std::cout << ": " << to_string(*t.result);
    if (t.outcome == Trace::Outcome::DepthExceeded)
      std::cout << " after " << t.steps.size() << " steps";
    std::cout << "\n";
    for (auto [a, b] : t.final_class.waits)
      std::cout << "  f" << a << " waits on f" << b << "\n";
  }

  if (t.outcome == Trace::Outcome::DepthExceeded && o.strict_bounds)
    return kTruncated;
  if (t.outcome == Trace::Outcome::Deadlocked && o.expect_terminate)
    return kNegative;
  return kOk;
}

// ---- explore --------------------------------------------------------------

int cmd_explore(const Options& o) {
  Program p;
  if (int rc = load_checked(o, o.file, p); rc != kOk) return rc;

  Lts lts = explore(p, bounds_of(o), mode_of(o));
  nlohmann::json lts_json = to_json(lts);
  bool cycle = has_tau_cycle(relabel(lts, LabelGranularity::Fine));

  int rc = kOk;
  std::ostream& info = o.format == "json" ? std::cerr : std::cout;
  if (o.format == "json" && o.out.empty())
    std::cout << lts_json.dump() << "\n";
  else if (!o.out.empty())
    if (int wrc = write_or_print(o, lts_json.dump() + "\n"); wrc != kOk)
      return wrc;

  info << "states: " << lts.num_states() << "\n";
  info << "edges: " << lts.edges.size() << "\n";
  info << "truncated: " << (lts.truncated ? "yes" : "no") << "\n";
  info << "tau-cycle: " << (cycle ? "present" : "absent") << "\n";

  if (o.check_preservation) {
    CheckReport r = check_preservation(p, lts, mode_of(o));
    info << "preservation: " << (r.ok ? "ok" : "FAILED " + r.failure) << "\n";
    if (!r.ok) rc = kNegative;
  }
  if (o.check_progress) {
    CheckReport r = check_progress(p, lts, mode_of(o));
    info << "progress: " << (r.ok ? "ok" : "FAILED " + r.failure) << "\n";
    if (!r.ok) rc = kNegative;
  }
  if (lts.truncated && o.strict_bounds) return kTruncated;
  return rc;
}

// ---- fwdelim --------------------------------------------------------------

int cmd_fwdelim(const Options& o) {
  Program p;
  if (int rc = load_checked(o, o.file, p); rc != kOk) return rc;
  FwdElimResult elim = fwd_elim(p);
  if (!elim.ok()) {
    for (const auto& e : elim.errors)
      std::cerr << render(e, o.file) << "\n";
    return kNegative;
  }
  return write_or_print(o, pretty(*elim.program));
}

// ---- bisim ----------------------------------------------------------------

int cmd_bisim(const Options& o) {
  if (o.mode == "flexible") {
    std::cerr << "error: bisim compares strict-mode semantics; "
                 "--mode flexible is not meaningful here\n";
    return kUsage;
  }
  Program pF;
  if (int rc = load_checked(o, o.file, pF); rc != kOk) return rc;

  Program pD;
  if (o.against.empty()) {
    FwdElimResult elim = fwd_elim(pF);
    if (!elim.ok()) {
      for (const auto& e : elim.errors)
        std::cerr << render(e, o.file) << "\n";
      return kNegative;
    }
    pD = std::move(*elim.program);
  } else {
    if (int rc = load_checked(o, o.against, pD); rc != kOk) return rc;
  }

  ExploreBounds bounds = bounds_of(o);
  Lts ltsF = explore(pF, bounds, ForwardMode::Strict);
  Lts ltsD = explore(pD, bounds, ForwardMode::Strict);
  ObsLts obsF = relabel(ltsF, labels_of(o));
  ObsLts obsD = relabel(ltsD, labels_of(o));
  BisimVerdict v = branching_bisimilar(obsF, obsD);

  std::ostream& info = o.format == "json" ? std::cerr : std::cout;
  if (o.format == "json")
    std::cout << to_json(v).dump() << "\n";
  else {
    std::cout << "verdict: " << (v.bisimilar ? "bisimilar" : "not_bisimilar")
              << "\n";
    if (!v.witness.empty()) {
      std::cout << "witness:";
      for (const auto& l : v.witness) std::cout << " " << to_string(l);
      std::cout << "\n";
      std::cout << "pair: " << v.pair.first << " " << v.pair.second << "\n";
    }
    if (!v.note.empty()) std::cout << "note: " << v.note << "\n";
  }

  int rc = v.bisimilar ? kOk : kNegative;
  if (o.check_r) {
    RCheckResult r = check_r_is_bisimulation(pF, pD);
    if (r.ok)
      info << "relation check: ok (" << r.pairs_checked << " pairs)\n";
    else
      info << "relation check: FAILED " << r.counterexample << "\n";
    if (r.truncated) info << "relation check: pair budget exhausted\n";
    if (!r.ok) rc = kNegative;
    for (const LemmaResult& lr : check_lemmas(r.pairs)) {
      info << "lemma " << lr.lemma << ": "
           << (lr.ok ? "ok (" + std::to_string(lr.checked) + " checks)"
                     : "FAILED " + lr.detail)
           << "\n";
      if (!lr.ok) rc = kNegative;
    }
  }
  if ((ltsF.truncated || ltsD.truncated) && o.strict_bounds) return kTruncated;
  return rc;
}

// ---- stats ----------------------------------------------------------------

int cmd_stats(const Options& o) {
  Program p;
  if (int rc = load_checked(o, o.file, p); rc != kOk) return rc;
  StatsReport s;
  try {
    s = delegation_stats(p, mode_of(o), o.max_steps);
  } catch (const RuntimeFault& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNegative;
  }

  if (o.format == "json") {
    std::cout << to_json(s).dump() << "\n";
    return kOk;
  }

  auto line = [&](const std::string& name, std::size_t a, std::size_t b) {
    std::cout << name;
    for (std::size_t i = name.size(); i < 24; ++i) std::cout << ' ';
    std::cout << a << "\t" << b << "\n";
  };
  std::cout << "rule                    forward\ttranslated\n";
  std::set<Rule> rules;
  for (const auto& [r, n] : s.forward_version.total) rules.insert(r);
  for (const auto& [r, n] : s.translated.total) rules.insert(r);
  for (Rule r : rules)
    line(to_string(r), s.forward_version.of(r), s.translated.of(r));
  line("reader GET-FUTURE", s.forward_version.of(Rule::GetFuture, kMainFuture),
       s.translated.of(Rule::GetFuture, kMainFuture));
  line("reader GET-DATA", s.forward_version.of(Rule::GetData, kMainFuture),
       s.translated.of(Rule::GetData, kMainFuture));
  line("total CHAIN-UPDATE", s.forward_version.of(Rule::ChainUpdate),
       s.translated.of(Rule::ChainUpdate));
  line("steps", s.forward_version.steps, s.translated.steps);
  if (s.forward_version.result && s.forward_version.result->is_base())
    std::cout << "result                  "
              << to_string(*s.forward_version.result) << "\t"
              << (s.translated.result ? to_string(*s.translated.result) : "-")
              << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for data-flow explicit futures"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd, bool takes_file = true) {
    if (takes_file)
      cmd->add_option("file", o.file, "source file")->required();
    cmd->add_option("--dialect", o.dialect, "force dialect: def or def+f");
    cmd->add_option("--mode", o.mode, "forward typing: strict or flexible")
        ->check(CLI::IsMember({"strict", "flexible"}));
    cmd->add_option("--format", o.format, "output format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("-o,--out", o.out, "output path");
  };

  CLI::App* check = app.add_subcommand("check", "parse and typecheck");
  add_common(check);

  CLI::App* runc = app.add_subcommand("run", "execute one scheduled trace");
  add_common(runc);
  runc->add_option("--seed", o.seed,
                   "use the seeded random scheduler with this seed");
  runc->add_option("--max-steps", o.max_steps, "step budget");
  runc->add_flag("--trace", o.trace, "emit JSON-lines trace of each step");
  runc->add_flag("--expect-terminate", o.expect_terminate,
                 "exit 1 if the run deadlocks");
  runc->add_flag("--strict-bounds", o.strict_bounds,
                 "exit 3 if the step budget truncates the run");

  CLI::App* explorec =
      app.add_subcommand("explore", "enumerate the reachable state space");
  add_common(explorec);
  explorec->add_option("--max-states", o.max_states, "state bound");
  explorec->add_option("--max-depth", o.max_depth, "depth bound");
  explorec->add_flag("--check-preservation", o.check_preservation,
                     "typecheck every reached configuration");
  explorec->add_flag("--check-progress", o.check_progress,
                     "verify every leaf is terminated or blocked on get*");
  explorec->add_flag("--strict-bounds", o.strict_bounds,
                     "exit 3 when bounds truncate the space");

  CLI::App* fwdelim =
      app.add_subcommand("fwdelim", "rewrite forward* into return");
  add_common(fwdelim);

  CLI::App* bisim = app.add_subcommand(
      "bisim", "compare a program against its forward*-free translation");
  add_common(bisim);
  bisim->add_option("--against", o.against,
                    "compare against this file instead of the translation");
  bisim->add_option("--labels", o.labels, "label granularity: fine or coarse")
      ->check(CLI::IsMember({"fine", "coarse"}));
  bisim->add_option("--max-states", o.max_states, "state bound");
  bisim->add_option("--max-depth", o.max_depth, "depth bound");
  bisim->add_flag("--check-r", o.check_r,
                  "also verify the simulation relation directly");
  bisim->add_flag("--strict-bounds", o.strict_bounds,
                  "exit 3 when bounds truncate the spaces");

  CLI::App* stats = app.add_subcommand(
      "stats", "step counts of the program and its translation");
  add_common(stats);
  stats->add_option("--max-steps", o.max_steps, "step budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (check->parsed()) return cmd_check(o);
    if (runc->parsed()) return cmd_run(o);
    if (explorec->parsed()) return cmd_explore(o);
    if (fwdelim->parsed()) return cmd_fwdelim(o);
    if (bisim->parsed()) return cmd_bisim(o);
    if (stats->parsed()) return cmd_stats(o);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
