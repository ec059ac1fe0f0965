#include <doctest.h>

#include "defcal/typecheck.hpp"
#include "helpers.hpp"

using namespace defcal;
using defcal::testing::load_corpus;
using defcal::testing::parse_or_die;

namespace {

bool strict_ok(const std::string& src) {
  return check_program(parse_or_die(src), ForwardMode::Strict).ok();
}

bool flexible_ok(const std::string& src) {
  return check_program(parse_or_die(src), ForwardMode::Flexible).ok();
}

bool has_rule(const CheckResult& r, const std::string& rule) {
  for (const auto& e : r.errors)
    if (e.rule == rule) return true;
  return false;
}

}  // namespace

TEST_CASE("collapse flattens any flow nesting") {
  CHECK(collapse(NestedFlowType{Base::Int, 0}) == Type::basic(Base::Int));
  CHECK(collapse(NestedFlowType{Base::Bool, 0}) == Type::basic(Base::Bool));
  CHECK(collapse(NestedFlowType{Base::Int, 1}) == Type::flow(Base::Int));
  CHECK(collapse(NestedFlowType{Base::Bool, 1}) == Type::flow(Base::Bool));
  CHECK(collapse(NestedFlowType{Base::Int, 2}) == Type::flow(Base::Int));
  CHECK(collapse(NestedFlowType{Base::Bool, 2}) == Type::flow(Base::Bool));
  CHECK(collapse(NestedFlowType{Base::Int, 3}) == Type::flow(Base::Int));
}

TEST_CASE("flow_of collapses an already-flow type") {
  CHECK(flow_of(Type::basic(Base::Int)) == Type::flow(Base::Int));
  CHECK(flow_of(Type::flow(Base::Int)) == Type::flow(Base::Int));
  CHECK(flow_of(Type::flow(Base::Bool)) == Type::flow(Base::Bool));
}

TEST_CASE("subtyping is equality plus base-to-flow lifting") {
  CHECK(subtype(Type::basic(Base::Int), Type::basic(Base::Int)));
  CHECK(subtype(Type::basic(Base::Int), Type::flow(Base::Int)));
  CHECK(subtype(Type::basic(Base::Bool), Type::flow(Base::Bool)));
  CHECK(subtype(Type::flow(Base::Int), Type::flow(Base::Int)));
  CHECK_FALSE(subtype(Type::flow(Base::Int), Type::basic(Base::Int)));
  CHECK_FALSE(subtype(Type::basic(Base::Int), Type::basic(Base::Bool)));
  CHECK_FALSE(subtype(Type::flow(Base::Int), Type::flow(Base::Bool)));
  CHECK_FALSE(subtype(Type::basic(Base::Int), Type::flow(Base::Bool)));
}

TEST_CASE("call sites lift base arguments into flow parameters") {
  CHECK(strict_ok(
      "fun int id(Flow[int] x) { int v; v = get* x; return v }\n"
      "{ int y; y = id(5); return y }"));
  CHECK(check_program(load_corpus("listing1b.def"), ForwardMode::Strict).ok());
}

TEST_CASE("async invocation collapses the nested flow") {
  // f returns Flow[int]; !f() is Flow[Flow[int]] before collapse
  CHECK(strict_ok(
      "fun Flow[int] f() { return 4 }\n"
      "{ Flow[int] r; int v; r = !f(); v = get* r; return v }"));
}

TEST_CASE("get* accepts a lifted base value") {
  CHECK(strict_ok("{ int t; t = get* 7; return t }"));
  CHECK(strict_ok("{ bool b; int r; b = get* true; if b { r = 1 } else "
                  "{ r = 0 }; return r }"));
}

TEST_CASE("get* yields the base type") {
  // the result is int, so it does not fit a bool...
  CHECK_FALSE(strict_ok(
      "{ Flow[int] a; bool b; b = get* a; return 0 }"));
  // ...but it lifts back into a flow like any other base value
  CHECK(strict_ok(
      "{ Flow[int] a; Flow[int] b; b = get* a; return 0 }"));
}

TEST_CASE("strict mode rejects forward* under a base return type") {
  Program p = load_corpus("flex_deadlock.def");
  CheckResult strict = check_program(p, ForwardMode::Strict);
  CHECK_FALSE(strict.ok());
  CHECK(has_rule(strict, "T-FORWARD"));
  CHECK(check_program(p, ForwardMode::Flexible).ok());
}

TEST_CASE("flexible mode still accepts the strict flow-typed shape") {
  CHECK(flexible_ok(
      "fun Flow[int] f(Flow[int] x) { forward* x }\n"
      "fun int g() { return 3 }\n"
      "{ Flow[int] a; Flow[int] b; int v; a = !g(); b = !f(a); "
      "v = get* b; return v }"));
}

TEST_CASE("forward* operand must carry the declared base") {
  CHECK_FALSE(strict_ok(
      "fun Flow[int] f(Flow[bool] x) { forward* x }\n"
      "{ int v; v = 0; return v }"));
  CHECK_FALSE(flexible_ok(
      "fun int f(Flow[bool] x) { forward* x }\n"
      "{ int v; v = 0; return v }"));
}

TEST_CASE("arithmetic rejects undereferenced flows") {
  CheckResult r = check_program(
      parse_or_die("{ Flow[int] x; int y; y = x + 1; return y }"),
      ForwardMode::Strict);
  CHECK_FALSE(r.ok());
}

TEST_CASE("conditions must be bool") {
  CHECK_FALSE(strict_ok("{ int x; if x { skip } else { skip }; return x }"));
  CHECK(strict_ok("{ bool b; int x; if b { x = 1 } else { x = 2 }; "
                  "return x }"));
}

TEST_CASE("assignment respects declared types") {
  CHECK_FALSE(strict_ok("{ int x; x = true; return x }"));
  CHECK_FALSE(strict_ok("{ Flow[bool] x; int y; x = !f(); return y }"));
  CHECK_FALSE(strict_ok("fun bool f() { return true }\n"
                        "{ Flow[int] x; x = !f(); return 0 }"));
  CHECK(strict_ok("{ Flow[int] x; x = 3; return 0 }"));
}

TEST_CASE("unknown names are reported") {
  CheckResult r = check_program(parse_or_die("{ int x; x = y; return x }"),
                                ForwardMode::Strict);
  CHECK(has_rule(r, "T-VAR"));
  CHECK_FALSE(strict_ok("{ int x; x = nosuch(1); return x }"));
}

TEST_CASE("arity and argument types are checked") {
  CHECK_FALSE(strict_ok("fun int f(int a) { return a }\n"
                        "{ int x; x = f(1, 2); return x }"));
  CHECK_FALSE(strict_ok("fun int f(bool a) { return 1 }\n"
                        "{ int x; x = f(3); return x }"));
}

TEST_CASE("every control path must end the task") {
  CHECK_FALSE(strict_ok("{ int x; x = 1 }"));
  CHECK_FALSE(strict_ok(
      "fun int f(bool b) { int r; if b { return 1 } else { r = 2 }; skip }\n"
      "{ int x; x = f(true); return x }"));
  CHECK(strict_ok(
      "fun int f(bool b) { if b { return 1 } else { return 2 } }\n"
      "{ int x; x = f(true); return x }"));
}

TEST_CASE("main returns an int flow") {
  CHECK_FALSE(strict_ok("{ bool b; b = true; return b }"));
  CHECK(strict_ok("fun Flow[int] f() { return 9 }\n"
                  "{ Flow[int] a; a = !f(); return a }"));
}

TEST_CASE("duplicate declarations are rejected") {
  CHECK_FALSE(strict_ok("{ int x; int x; return x }"));
  CHECK_FALSE(strict_ok("fun int f(int a, bool a) { return 1 }\n"
                        "{ int x; return x }"));
  CHECK_FALSE(strict_ok("fun int f() { return 1 }\nfun int f() { return 2 }\n"
                        "{ int x; return x }"));
}

TEST_CASE("locals may shadow globals") {
  CHECK(strict_ok("int g;\n"
                  "fun int f(int g) { g = g + 1; return g }\n"
                  "{ int x; g = 3; x = f(10); return x }"));
}
