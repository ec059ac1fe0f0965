#include "defcal/typecheck.hpp"

#include <set>
#include <sstream>

namespace defcal {

std::string render(const TypeError& e, std::string_view file) {
  std::ostringstream out;
  if (e.future) {
    out << "future f" << *e.future << ": ";
  } else {
    if (!file.empty()) out << file << ":";
    out << e.loc.line << ":" << e.loc.column << ": ";
  }
  out << "[" << e.rule << "] " << e.message;
  return out.str();
}

Type collapse(const NestedFlowType& t) {
  return t.depth == 0 ? Type::basic(t.base) : Type::flow(t.base);
}

Type flow_of(const Type& t) { return Type::flow(t.base()); }

bool subtype(const Type& a, const Type& b) {
  if (a == b) return true;
  return !a.is_flow() && b.is_flow() && a.base() == b.base();
}

namespace {

void err(std::vector<TypeError>& errors, SourceLoc loc, std::string rule,
         std::string message) {
  errors.push_back(TypeError{loc, std::nullopt, std::move(rule),
                             std::move(message)});
}

std::optional<Type> type_of_atom(const TypeEnv& env, const Atom& a,
                                 std::vector<TypeError>& errors) {
  return std::visit(
      [&](const auto& n) -> std::optional<Type> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarRef>) {
          if (auto t = env.lookup(n.name)) return t;
          err(errors, a.loc, "T-VAR", "unknown variable '" + n.name + "'");
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, IntLit>) {
          return Type::basic(Base::Int);
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return Type::basic(Base::Bool);
        } else {
          err(errors, a.loc, "T-VAR",
              "future literal in source program");
          return std::nullopt;
        }
      },
      a.node);
}

// operator signatures: + - * : int,int -> int; == < <= : int,int -> bool;
// == && || : bool,bool -> bool
std::optional<Type> type_of_binop(const TypeEnv& env, const BinOp& b,
                                  SourceLoc loc,
                                  std::vector<TypeError>& errors) {
  auto lt = type_of_atom(env, b.lhs, errors);
  auto rt = type_of_atom(env, b.rhs, errors);
  if (!lt || !rt) return std::nullopt;
  auto mismatch = [&]() -> std::optional<Type> {
    err(errors, loc, "T-EXPRESSION",
        "operator '" + to_string(b.op) + "' not defined on " + to_string(*lt) +
            " and " + to_string(*rt));
    return std::nullopt;
  };
  if (lt->is_flow() || rt->is_flow()) return mismatch();
  Base l = lt->base(), r = rt->base();
  switch (b.op) {
    case BinaryOp::Add:
    case BinaryOp::Sub:
    case BinaryOp::Mul:
      if (l == Base::Int && r == Base::Int) return Type::basic(Base::Int);
      return mismatch();
    case BinaryOp::Lt:
    case BinaryOp::Le:
      if (l == Base::Int && r == Base::Int) return Type::basic(Base::Bool);
      return mismatch();
    case BinaryOp::Eq:
      if (l == r) return Type::basic(Base::Bool);
      return mismatch();
    case BinaryOp::And:
    case BinaryOp::Or:
      if (l == Base::Bool && r == Base::Bool) return Type::basic(Base::Bool);
      return mismatch();
  }
  return mismatch();
}

std::optional<Type> type_of_call(const TypeEnv& env, const std::string& fn,
                                 const std::vector<Atom>& args, SourceLoc loc,
                                 const char* rule, bool async,
                                 std::vector<TypeError>& errors) {
  auto it = env.funs.find(fn);
  if (it == env.funs.end()) {
    err(errors, loc, rule, "unknown function '" + fn + "'");
    return std::nullopt;
  }
  const Signature& sig = it->second;
  if (sig.params.size() != args.size()) {
    err(errors, loc, rule,
        "'" + fn + "' expects " + std::to_string(sig.params.size()) +
            " argument(s), got " + std::to_string(args.size()));
    return std::nullopt;
  }
  bool ok = true;
  for (std::size_t i = 0; i < args.size(); ++i) {
    auto at = type_of_atom(env, args[i], errors);
    if (!at) {
      ok = false;
      continue;
    }
    if (!subtype(*at, sig.params[i])) {
      err(errors, args[i].loc, rule,
          "argument " + std::to_string(i + 1) + " of '" + fn + "' has type " +
              to_string(*at) + ", expected " + to_string(sig.params[i]));
      ok = false;
    }
  }
  if (!ok) return std::nullopt;
  if (!async) return sig.ret;
  // the future wrapping collapses: Flow[Flow[B]] and Flow[B] both
  // become Flow[B]
  return collapse(NestedFlowType{sig.ret.base(), sig.ret.is_flow() ? 2 : 1});
}

}  // namespace

std::optional<Type> type_of_rhs(const TypeEnv& env, const Rhs& rhs,
                                std::vector<TypeError>& errors) {
  return std::visit(
      [&](const auto& n) -> std::optional<Type> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr>) {
          if (const auto* b = std::get_if<BinOp>(&n.node))
            return type_of_binop(env, *b, b->lhs.loc, errors);
          return type_of_atom(env, std::get<Atom>(n.node), errors);
        } else if constexpr (std::is_same_v<T, SyncCall>) {
          return type_of_call(env, n.fn, n.args, n.loc, "T-INVK-SYNC", false,
                              errors);
        } else if constexpr (std::is_same_v<T, AsyncCall>) {
          return type_of_call(env, n.fn, n.args, n.loc, "T-INVK-ASYNC", true,
                              errors);
        } else if constexpr (std::is_same_v<T, GetStar>) {
          auto t = type_of_atom(env, n.target, errors);
          if (!t) return std::nullopt;
          // operand must be (liftable to) a flow; yields the base
          return Type::basic(t->base());
        } else {
          err(errors, SourceLoc{}, "T-ASSIGN",
              "pending-result marker in source program");
          return std::nullopt;
        }
      },
      rhs.node);
}

void check_stmt(const TypeEnv& env, const std::string& fn, const Type& ret,
                const StmtPtr& s, Dialect dialect, ForwardMode mode,
                std::vector<TypeError>& errors) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Skip>) {
          // nothing
        } else if constexpr (std::is_same_v<T, Assign>) {
          auto target = env.lookup(n.target);
          if (!target)
            err(errors, s->loc, "T-ASSIGN",
                "unknown variable '" + n.target + "'");
          auto t = type_of_rhs(env, n.rhs, errors);
          if (target && t && !subtype(*t, *target))
            err(errors, s->loc, "T-ASSIGN",
                "cannot assign " + to_string(*t) + " to '" + n.target +
                    "' of type " + to_string(*target));
        } else if constexpr (std::is_same_v<T, If>) {
          auto c = type_of_atom(env, n.cond, errors);
          if (c && *c != Type::basic(Base::Bool))
            err(errors, n.cond.loc, "T-IF",
                "condition has type " + to_string(*c) + ", expected bool");
          check_stmt(env, fn, ret, n.then_branch, dialect, mode, errors);
          check_stmt(env, fn, ret, n.else_branch, dialect, mode, errors);
        } else if constexpr (std::is_same_v<T, Seq>) {
          check_stmt(env, fn, ret, n.first, dialect, mode, errors);
          check_stmt(env, fn, ret, n.second, dialect, mode, errors);
        } else if constexpr (std::is_same_v<T, Return>) {
          auto t = type_of_atom(env, n.value, errors);
          if (t && !subtype(*t, ret))
            err(errors, s->loc, "T-RETURN",
                "returning " + to_string(*t) + " from '" + fn +
                    "' declared " + to_string(ret));
        } else {  // ForwardStar
          if (dialect == Dialect::Def) {
            err(errors, s->loc, "T-FORWARD",
                "forward* is not available in dialect def");
            return;
          }
          auto t = type_of_atom(env, n.value, errors);
          if (!t) return;
          Type want = Type::flow(ret.base());
          if (mode == ForwardMode::Strict) {
            if (!ret.is_flow()) {
              err(errors, s->loc, "T-FORWARD",
                  "forward* requires '" + fn + "' to return a Flow type, not " +
                      to_string(ret));
              return;
            }
            if (!subtype(*t, want))
              err(errors, s->loc, "T-FORWARD",
                  "forwarding " + to_string(*t) + " from '" + fn +
                      "' declared " + to_string(ret));
          } else {
            // flexible: the operand must still carry the declared base,
            // but a base-typed return is fine
            if (!subtype(*t, want))
              err(errors, s->loc, "T-CEF-FORWARD",
                  "forwarding " + to_string(*t) + " from '" + fn +
                      "' declared " + to_string(ret));
          }
        }
      },
      s->node);
}

namespace {

// every control path ends in return or forward*
bool all_paths_return(const StmtPtr& s) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Return> ||
                      std::is_same_v<T, ForwardStar>) {
          return true;
        } else if constexpr (std::is_same_v<T, Seq>) {
          return all_paths_return(n.first) || all_paths_return(n.second);
        } else if constexpr (std::is_same_v<T, If>) {
          return all_paths_return(n.then_branch) &&
                 all_paths_return(n.else_branch);
        } else {
          return false;
        }
      },
      s->node);
}

void check_decls(const std::vector<VarDecl>& decls, const char* what,
                 std::set<std::string>& seen, std::vector<TypeError>& errors) {
  for (const auto& d : decls) {
    if (is_reserved_word(d.name))
      err(errors, d.loc, "T-METHOD",
          "'" + d.name + "' is a reserved word");
    if (!seen.insert(d.name).second)
      err(errors, d.loc, "T-METHOD",
          std::string("duplicate ") + what + " '" + d.name + "'");
  }
}

}  // namespace

CheckResult check_program(const Program& p, ForwardMode mode) {
  CheckResult result;
  auto& errors = result.errors;

  std::set<std::string> global_names;
  check_decls(p.globals, "global", global_names, errors);
  for (const auto& g : p.globals)
    result.env.vars.emplace(g.name, g.type);

  for (const auto& f : p.functions) {
    if (is_reserved_word(f.name)) {
      err(errors, f.loc, "T-METHOD", "'" + f.name + "' is a reserved word");
      continue;
    }
    Signature sig;
    for (const auto& prm : f.params) sig.params.push_back(prm.type);
    sig.ret = f.return_type;
    if (!result.env.funs.emplace(f.name, std::move(sig)).second)
      err(errors, f.loc, "T-METHOD", "duplicate function '" + f.name + "'");
  }

  for (const auto& f : p.functions) {
    std::set<std::string> names;
    check_decls(f.params, "parameter", names, errors);
    check_decls(f.locals, "local", names, errors);
    TypeEnv env = result.env;
    for (const auto& v : f.params) env.vars.insert_or_assign(v.name, v.type);
    for (const auto& v : f.locals) env.vars.insert_or_assign(v.name, v.type);
    check_stmt(env, f.name, f.return_type, f.body, p.dialect, mode, errors);
    if (!all_paths_return(f.body))
      err(errors, f.loc, "T-METHOD",
          "function '" + f.name + "' may finish without return or forward*");
  }

  {
    std::set<std::string> names;
    check_decls(p.main_locals, "local", names, errors);
    TypeEnv env = result.env;
    for (const auto& v : p.main_locals) env.vars.insert_or_assign(v.name, v.type);
    check_stmt(env, "main", main_return_type(), p.main_body, p.dialect, mode,
               errors);
    if (!all_paths_return(p.main_body))
      err(errors, SourceLoc{1, 1}, "T-METHOD",
          "main body may finish without return or forward*");
  }

  return result;
}

}  // namespace defcal
