#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "defcal/ast.hpp"
#include "defcal/typecheck.hpp"

namespace defcal {

// ---------------------------------------------------------------------------
// runtime values and stores
// ---------------------------------------------------------------------------

struct FutRef {
  FutureId id = 0;
  bool operator==(const FutRef&) const = default;
  auto operator<=>(const FutRef&) const = default;
};

struct Value {
  std::variant<std::int64_t, bool, FutRef> v;

  static Value of_int(std::int64_t i) { return Value{i}; }
  static Value of_bool(bool b) { return Value{b}; }
  static Value of_fut(FutureId f) { return Value{FutRef{f}}; }

  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_fut() const { return std::holds_alternative<FutRef>(v); }
  bool is_base() const { return !is_fut(); }

  std::int64_t as_int() const { return std::get<std::int64_t>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  FutureId as_fut() const { return std::get<FutRef>(v).id; }

  bool operator==(const Value&) const = default;
};

std::string to_string(const Value& w);

// keyed map keeps serialization and comparison canonical
using Store = std::map<std::string, Value>;

Value init_value(const Type& t);

// Value of an atom under globals overlaid with frame locals (locals win).
Value eval(const Store& globals, const Store& locals, const Atom& a);
Value eval(const Store& globals, const Store& locals, const Expr& e);

// Writes through to the innermost store that binds x.
void store_update(Store& globals, Store& locals, const std::string& x,
                  Value w);

// Turns a runtime value back into an atom (for rewritten statements).
Atom atom_of(const Value& w);

// ---------------------------------------------------------------------------
// configurations
// ---------------------------------------------------------------------------

struct Frame {
  Store locals;
  StmtPtr stmt;  // kept in normal form
  std::string fn;
};
bool operator==(const Frame& a, const Frame& b);

// Frames run top-of-stack last in the vector.
struct Unresolved {
  std::vector<Frame> frames;
};
struct Resolved {
  Value value;
  bool operator==(const Resolved&) const = default;
};
struct Chained {
  FutureId target = 0;
  bool operator==(const Chained&) const = default;
};
bool operator==(const Unresolved& a, const Unresolved& b);

using FutureState = std::variant<Unresolved, Resolved, Chained>;

struct Configuration {
  Store globals;
  std::map<FutureId, FutureState> futures;
  FutureId next_id = 0;
  Dialect dialect = Dialect::Def;

  // Base result type of the function each future was created for.
  // Typing metadata for reconstructing the configuration-typing
  // environment; not part of the state proper (excluded from equality
  // and digests).
  std::map<FutureId, Base> result_base;
};

bool operator==(const Configuration& a, const Configuration& b);

inline constexpr FutureId kMainFuture = 0;

// ---------------------------------------------------------------------------
// transitions
// ---------------------------------------------------------------------------

// Declaration order fixes the tie-break order schedulers use.
enum class Rule {
  Skip, Assign, IfTrue, IfFalse,
  InvkSync, InvkAsync, ReturnSync, ReturnAsync,
  GetFuture, GetData,
  ForwardSync, ForwardAsync, ForwardData, ChainUpdate,
  CefForwardSync,
};

std::string to_string(Rule r);

struct TransitionLabel {
  Rule rule;
  FutureId actor = 0;  // the future whose task stepped (or was chained)
  bool operator==(const TransitionLabel&) const = default;
};

std::string to_string(const TransitionLabel& l);

// A malformed configuration reached at runtime (evaluation of a future
// in an arithmetic position, a write to an unbound variable, ...).
// Well-typed programs never trigger these.
struct RuntimeFault : std::logic_error {
  using std::logic_error::logic_error;
};

// Function lookup prepared once per program.
struct FunctionTable {
  const Program* program = nullptr;
  std::map<std::string, const FunDef*> by_name;

  static FunctionTable build(const Program& p);
  const FunDef& get(const std::string& name) const;
};

// Fresh callee frame: parameters bound to the arguments, locals to
// their type's initial value, body in normal form.
Frame bind_frame(const FunDef& fn, const std::vector<Value>& args);

Configuration initial_configuration(const Program& p);

// All transitions enabled in cn, each with its successor. Pure: cn is
// not modified; successors share unchanged structure.
std::vector<std::pair<TransitionLabel, Configuration>> enabled_transitions(
    const FunctionTable& fns, const Configuration& cn, ForwardMode mode);
std::vector<std::pair<TransitionLabel, Configuration>> enabled_transitions(
    const Program& p, const Configuration& cn, ForwardMode mode);

// ---------------------------------------------------------------------------
// terminal-state classification
// ---------------------------------------------------------------------------

struct Classification {
  enum Kind { Running, Terminated, Deadlocked } kind = Running;
  // wait-for edges in a deadlock: reader/chain source -> awaited future
  std::vector<std::pair<FutureId, FutureId>> waits;
};

Classification classify(const FunctionTable& fns, const Configuration& cn,
                        ForwardMode mode);

// The awaited future when this future's task sits on a get* of an
// unresolved future (or is a chain with an unresolved target);
// nullopt when the task is not blocked that way.
std::optional<FutureId> blocked_target(const Configuration& cn,
                                       const FutureState& state);

// Follows resolved/chained links from f down to a base value, if any.
std::optional<Value> final_value(const Configuration& cn, FutureId f);

}  // namespace defcal
