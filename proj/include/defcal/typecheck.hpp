#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "defcal/ast.hpp"

namespace defcal {

// How forward* interacts with synchronous calls. Strict requires the
// enclosing function to declare a Flow return type and never converts;
// Flexible also admits base-typed returns and synchronizes on demand at
// runtime.
enum class ForwardMode { Strict, Flexible };

struct Signature {
  std::vector<Type> params;
  Type ret = Type::flow(Base::Int);
};

struct TypeEnv {
  std::map<std::string, Type> vars;
  std::map<std::string, Signature> funs;

  std::optional<Type> lookup(const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  }
};

struct TypeError {
  SourceLoc loc;                    // source position, when known
  std::optional<FutureId> future;   // set for configuration-level errors
  std::string rule;                 // e.g. "T-GET"
  std::string message;
};

std::string render(const TypeError& e, std::string_view file = "");

struct CheckResult {
  TypeEnv env;
  std::vector<TypeError> errors;
  bool ok() const { return errors.empty(); }
};

// Flattens any number of Flow layers down to at most one.
Type collapse(const NestedFlowType& t);
// The collapsed type of Flow[t] — what an async invocation returns.
Type flow_of(const Type& t);
// a <: b. Base types lift into their Flow type; nothing else relates.
bool subtype(const Type& a, const Type& b);

// Computes the type of a right-hand side, appending errors on failure.
// `fn` names the enclosing function ("main" for the main body).
std::optional<Type> type_of_rhs(const TypeEnv& env, const Rhs& rhs,
                                std::vector<TypeError>& errors);

void check_stmt(const TypeEnv& env, const std::string& fn, const Type& ret,
                const StmtPtr& s, Dialect dialect, ForwardMode mode,
                std::vector<TypeError>& errors);

// Whole-program check: declarations well-formed, bodies well-typed, and
// every control path of every body ends in return or forward*.
CheckResult check_program(const Program& p, ForwardMode mode);

// Return type every main body is checked against.
inline Type main_return_type() { return Type::flow(Base::Int); }

}  // namespace defcal
