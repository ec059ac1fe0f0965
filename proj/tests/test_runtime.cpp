#include <doctest.h>

#include <algorithm>

#include "defcal/explore.hpp"
#include "defcal/runtime.hpp"
#include "helpers.hpp"

using namespace defcal;
using defcal::testing::load_corpus;
using defcal::testing::parse_or_die;

namespace {

std::vector<Rule> actor_rules(const Trace& t, FutureId actor) {
  std::vector<Rule> out;
  for (const auto& step : t.steps)
    if (step.label.actor == actor) out.push_back(step.label.rule);
  return out;
}

bool has_rule(const Trace& t, Rule r) {
  return std::any_of(t.steps.begin(), t.steps.end(), [&](const TraceStep& s) {
    return s.label.rule == r;
  });
}

const Frame& top_frame(const Configuration& cn, FutureId f) {
  return std::get<Unresolved>(cn.futures.at(f)).frames.back();
}

}  // namespace

TEST_CASE("locals shadow globals in eval and store_update") {
  Store globals{{"g", Value::of_int(1)}, {"h", Value::of_int(0)}};
  Store locals{{"g", Value::of_int(2)}};
  CHECK(eval(globals, locals, var_atom("g")) == Value::of_int(2));
  CHECK(eval(globals, locals, var_atom("h")) == Value::of_int(0));

  store_update(globals, locals, "g", Value::of_int(9));
  CHECK(locals.at("g") == Value::of_int(9));
  CHECK(globals.at("g") == Value::of_int(1));

  store_update(globals, locals, "h", Value::of_int(7));
  CHECK(globals.at("h") == Value::of_int(7));
}

TEST_CASE("initial values are the base zeros, flows pre-resolved") {
  CHECK(init_value(Type::basic(Base::Int)) == Value::of_int(0));
  CHECK(init_value(Type::basic(Base::Bool)) == Value::of_bool(false));
  CHECK(init_value(Type::flow(Base::Int)) == Value::of_int(0));
  CHECK(init_value(Type::flow(Base::Bool)) == Value::of_bool(false));
}

TEST_CASE("initial configuration holds only the zeroed main task") {
  Program p = load_corpus("global_writer.def");
  Configuration cn = initial_configuration(p);
  CHECK(cn.futures.size() == 1);
  CHECK(cn.next_id == 1);
  CHECK(cn.globals.at("g") == Value::of_int(0));
  const Frame& f = top_frame(cn, kMainFuture);
  CHECK(f.fn == "main");
  CHECK(f.locals.at("x") == Value::of_int(0));
  CHECK(is_normalized(f.stmt));
}

TEST_CASE("a resolved chain is dereferenced one link per step") {
  Program ctx = parse_or_die("{ int y; y = 0; return y }");
  Configuration cn;
  cn.next_id = 3;
  Store locals{{"x", Value::of_fut(1)}, {"y", Value::of_int(0)}};
  StmtPtr body = normalize(make_stmt(
      Seq{make_stmt(Assign{"y", Rhs{GetStar{var_atom("x")}}}),
          make_stmt(Return{var_atom("y")})}));
  cn.futures[0] = Unresolved{{Frame{locals, body, "main"}}};
  cn.futures[1] = Resolved{Value::of_fut(2)};
  cn.futures[2] = Resolved{Value::of_int(4)};
  cn.result_base = {{0, Base::Int}, {1, Base::Int}, {2, Base::Int}};

  auto steps1 = enabled_transitions(ctx, cn, ForwardMode::Strict);
  REQUIRE(steps1.size() == 1);
  CHECK(steps1[0].first == TransitionLabel{Rule::GetFuture, 0});
  const Frame& f1 = top_frame(steps1[0].second, 0);
  auto [h1, t1] = split_head(f1.stmt);
  CHECK(std::get<GetStar>(std::get<Assign>(h1->node).rhs.node).target ==
        fut_atom(2));

  auto steps2 = enabled_transitions(ctx, steps1[0].second, ForwardMode::Strict);
  REQUIRE(steps2.size() == 1);
  CHECK(steps2[0].first == TransitionLabel{Rule::GetFuture, 0});
  const Frame& f2 = top_frame(steps2[0].second, 0);
  auto [h2, t2] = split_head(f2.stmt);
  CHECK(std::get<GetStar>(std::get<Assign>(h2->node).rhs.node).target ==
        int_atom(4));

  auto steps3 = enabled_transitions(ctx, steps2[0].second, ForwardMode::Strict);
  REQUIRE(steps3.size() == 1);
  CHECK(steps3[0].first == TransitionLabel{Rule::GetData, 0});
  const Frame& f3 = top_frame(steps3[0].second, 0);
  CHECK(f3.locals.at("y") == Value::of_int(4));
  auto [h3, t3] = split_head(f3.stmt);
  CHECK(std::holds_alternative<Return>(h3->node));
}

TEST_CASE("get* blocks on unresolved and chained targets") {
  Program ctx = parse_or_die("{ int y; y = 0; return y }");
  Configuration cn;
  cn.next_id = 2;
  StmtPtr body = normalize(make_stmt(
      Seq{make_stmt(Assign{"y", Rhs{GetStar{fut_atom(1)}}}),
          make_stmt(Return{var_atom("y")})}));
  cn.futures[0] =
      Unresolved{{Frame{{{"y", Value::of_int(0)}}, body, "main"}}};
  cn.futures[1] = Chained{0};
  cn.result_base = {{0, Base::Int}, {1, Base::Int}};
  CHECK(enabled_transitions(ctx, cn, ForwardMode::Strict).empty());
  CHECK(blocked_target(cn, cn.futures.at(0)) == FutureId{1});
}

TEST_CASE("reader of the two-stage delegation follows the full chain") {
  Program p = load_corpus("listing1b.def");
  Trace t = run(p, SchedulerPolicy::round_robin(), ForwardMode::Strict);
  CHECK(t.outcome == Trace::Outcome::Terminated);
  CHECK(t.result == Value::of_int(10));

  std::vector<Rule> want{Rule::InvkAsync, Rule::GetFuture, Rule::GetFuture,
                         Rule::GetData,   Rule::Assign,    Rule::InvkAsync,
                         Rule::GetFuture, Rule::GetFuture, Rule::GetData,
                         Rule::ReturnAsync};
  CHECK(actor_rules(t, kMainFuture) == want);

  // the spawn stage: a fresh task with the argument bound
  CHECK(t.steps[0].label == TransitionLabel{Rule::InvkAsync, 0});
  const Frame& spawned = top_frame(t.steps[0].config, 1);
  CHECK(spawned.fn == "foo");
  CHECK(spawned.locals.at("x") == Value::of_int(1));

  // the delegation stage: outer future resolved to the inner, inner to 4
  bool staged = std::any_of(
      t.steps.begin(), t.steps.end(), [](const TraceStep& s) {
        const auto* a = std::get_if<Resolved>(&s.config.futures.at(1));
        if (!a || a->value != Value::of_fut(2)) return false;
        const auto* b = std::get_if<Resolved>(&s.config.futures.at(2));
        return b && b->value == Value::of_int(4);
      });
  CHECK(staged);
}

TEST_CASE("forward* collapses the chain ahead of the reader") {
  Program p = load_corpus("listing1b_fwd.def");
  Trace t = run(p, SchedulerPolicy::round_robin(), ForwardMode::Strict);
  CHECK(t.outcome == Trace::Outcome::Terminated);
  CHECK(t.result == Value::of_int(10));

  std::vector<Rule> want{Rule::InvkAsync, Rule::GetFuture, Rule::GetData,
                         Rule::Assign,    Rule::InvkAsync, Rule::GetFuture,
                         Rule::GetData,   Rule::ReturnAsync};
  CHECK(actor_rules(t, kMainFuture) == want);

  bool chained = false, updated = false;
  for (const auto& s : t.steps) {
    if (s.label == TransitionLabel{Rule::ForwardAsync, 1}) {
      const auto* c = std::get_if<Chained>(&s.config.futures.at(1));
      chained = c && c->target == 2;
    }
    if (s.label == TransitionLabel{Rule::ChainUpdate, 1}) {
      const auto* r = std::get_if<Resolved>(&s.config.futures.at(1));
      updated = r && r->value == Value::of_int(4);
    }
  }
  CHECK(chained);
  CHECK(updated);
}

TEST_CASE("synchronous calls stack a frame and return in one step") {
  Program p = load_corpus("strict_listing4.def");
  Trace t = run(p, SchedulerPolicy::round_robin(), ForwardMode::Strict);
  CHECK(t.outcome == Trace::Outcome::Terminated);
  CHECK(t.result == Value::of_int(42));
  CHECK(has_rule(t, Rule::InvkSync));
  CHECK(has_rule(t, Rule::ForwardSync));
  CHECK(has_rule(t, Rule::ReturnSync));

  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    if (t.steps[i].label.rule != Rule::InvkSync) continue;
    const Unresolved& u =
        std::get<Unresolved>(t.steps[i].config.futures.at(0));
    REQUIRE(u.frames.size() == 2);
    CHECK(u.frames.back().fn == "bar");
    auto [h, tl] = split_head(u.frames.front().stmt);
    const Assign& marker = std::get<Assign>(h->node);
    CHECK(marker.target == "x");
    CHECK(std::holds_alternative<PendingResult>(marker.rhs.node));
  }

  for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) {
    if (t.steps[i].label.rule != Rule::ForwardSync) continue;
    // strict sync forward becomes an evaluated return in place
    const Unresolved& u =
        std::get<Unresolved>(t.steps[i].config.futures.at(0));
    auto [h, tl] = split_head(u.frames.back().stmt);
    CHECK(std::get<Return>(h->node).value == fut_atom(1));
    CHECK(t.steps[i + 1].label.rule == Rule::ReturnSync);
    const Unresolved& after =
        std::get<Unresolved>(t.steps[i + 1].config.futures.at(0));
    CHECK(after.frames.size() == 1);
    CHECK(after.frames.back().locals.at("x") == Value::of_fut(1));
  }
}

TEST_CASE("flexible sync forward inserts a get on the target") {
  Program p = load_corpus("flex_deadlock.def");
  Trace t = run(p, SchedulerPolicy::round_robin(), ForwardMode::Flexible);
  CHECK(t.outcome == Trace::Outcome::Deadlocked);

  bool saw = false;
  for (const auto& s : t.steps) {
    if (s.label.rule != Rule::CefForwardSync) continue;
    saw = true;
    const Unresolved& u = std::get<Unresolved>(s.config.futures.at(0));
    const Frame& top = u.frames.back();
    CHECK(top.locals.at("$fwd0") == Value::of_int(0));
    auto [h, tl] = split_head(top.stmt);
    const Assign& a = std::get<Assign>(h->node);
    CHECK(a.target == "$fwd0");
    CHECK(std::get<GetStar>(a.rhs.node).target == fut_atom(1));
    auto [h2, tl2] = split_head(tl);
    CHECK(std::get<Return>(h2->node).value == var_atom("$fwd0"));
  }
  CHECK(saw);

  using P = std::pair<FutureId, FutureId>;
  auto& waits = t.final_class.waits;
  CHECK(std::find(waits.begin(), waits.end(), P{0, 1}) != waits.end());
  CHECK(std::find(waits.begin(), waits.end(), P{1, 1}) != waits.end());
}

TEST_CASE("bottom-frame forward of a base value resolves directly") {
  Program p = parse_or_die(
      "#dialect def+f\n"
      "fun Flow[int] f() { forward* 5 }\n"
      "{ Flow[int] a; int x; a = !f(); x = get* a; return x }");
  Trace t = run(p, SchedulerPolicy::round_robin(), ForwardMode::Strict);
  CHECK(has_rule(t, Rule::ForwardData));
  CHECK(t.outcome == Trace::Outcome::Terminated);
  CHECK(t.result == Value::of_int(5));
}

TEST_CASE("the chain cycle deadlocks with its wait graph reported") {
  Program p = load_corpus("cycle2.def");
  Trace t = run(p, SchedulerPolicy::round_robin(), ForwardMode::Strict);
  CHECK(t.outcome == Trace::Outcome::Deadlocked);
  CHECK(t.result == std::nullopt);

  using P = std::pair<FutureId, FutureId>;
  auto& waits = t.final_class.waits;
  CHECK(std::find(waits.begin(), waits.end(), P{0, 1}) != waits.end());
  CHECK(std::find(waits.begin(), waits.end(), P{1, 2}) != waits.end());
  CHECK(std::find(waits.begin(), waits.end(), P{2, 1}) != waits.end());

  const Configuration& last = t.steps.back().config;
  CHECK(final_value(last, 0) == std::nullopt);
}

TEST_CASE("final_value follows resolved and chained links") {
  Configuration cn;
  cn.next_id = 4;
  cn.futures[0] = Resolved{Value::of_fut(1)};
  cn.futures[1] = Chained{2};
  cn.futures[2] = Resolved{Value::of_fut(3)};
  cn.futures[3] = Resolved{Value::of_int(11)};
  CHECK(final_value(cn, 0) == Value::of_int(11));
  CHECK(final_value(cn, 3) == Value::of_int(11));

  cn.futures[3] = Unresolved{};
  CHECK(final_value(cn, 0) == std::nullopt);
}

TEST_CASE("malformed states raise runtime faults") {
  Program ctx = parse_or_die("{ int y; y = 0; return y }");
  Configuration cn;
  cn.next_id = 1;
  StmtPtr body = normalize(make_stmt(
      Seq{make_stmt(Assign{"y", Rhs{Expr{var_atom("nosuch")}}}),
          make_stmt(Return{var_atom("y")})}));
  cn.futures[0] =
      Unresolved{{Frame{{{"y", Value::of_int(0)}}, body, "main"}}};
  cn.result_base = {{0, Base::Int}};
  CHECK_THROWS_AS(enabled_transitions(ctx, cn, ForwardMode::Strict),
                  RuntimeFault);
}

TEST_CASE("round-robin runs are reproducible") {
  Program p = load_corpus("branch_if.def");
  Trace a = run(p, SchedulerPolicy::round_robin(), ForwardMode::Strict);
  Trace b = run(p, SchedulerPolicy::round_robin(), ForwardMode::Strict);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].label == b.steps[i].label);
    CHECK(a.steps[i].config == b.steps[i].config);
  }
  CHECK(a.result == Value::of_int(3));
}

TEST_CASE("seeded runs are reproducible and converge on the result") {
  Program p = load_corpus("listing1b.def");
  for (std::uint64_t seed : {1ull, 7ull, 1234ull}) {
    Trace a = run(p, SchedulerPolicy::random(seed), ForwardMode::Strict);
    Trace b = run(p, SchedulerPolicy::random(seed), ForwardMode::Strict);
    CHECK(a.steps.size() == b.steps.size());
    CHECK(a.result == Value::of_int(10));
    CHECK(b.result == Value::of_int(10));
  }
}
