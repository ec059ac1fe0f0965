#include "defcal/config_typing.hpp"

#include <set>
#include <sstream>

namespace defcal {

std::optional<Base> ConfigTypeEnv::future_base(FutureId f) const {
  if (auto it = resolved.find(f); it != resolved.end())
    return it->second.base();
  if (auto it = pending.find(f); it != pending.end()) {
    if (it->second.empty()) return std::nullopt;
    // the bottom function of the stack is the task's own function
    const std::string& fn = it->second.front().second;
    auto sig = globals.funs.find(fn);
    if (sig != globals.funs.end()) return sig->second.ret.base();
    if (fn == "main") return main_return_type().base();
  }
  return std::nullopt;
}

namespace {

TypeEnv base_env(const Program& p) {
  TypeEnv env;
  for (const auto& g : p.globals) env.vars.emplace(g.name, g.type);
  for (const auto& f : p.functions) {
    Signature sig;
    for (const auto& prm : f.params) sig.params.push_back(prm.type);
    sig.ret = f.return_type;
    env.funs.emplace(f.name, std::move(sig));
  }
  return env;
}

const FunDef* find_fn(const Program& p, const std::string& name) {
  for (const auto& f : p.functions)
    if (f.name == name) return &f;
  return nullptr;
}

// Frame-local environment: function params/locals over the globals,
// plus any $fwd locals the flexible semantics added, typed at the
// function's base return type.
TypeEnv frame_env(const Program& p, const TypeEnv& globals,
                  const std::string& fn, const Store& locals) {
  TypeEnv env = globals;
  Type ret = main_return_type();
  if (const FunDef* fd = find_fn(p, fn)) {
    for (const auto& v : fd->params) env.vars.insert_or_assign(v.name, v.type);
    for (const auto& v : fd->locals) env.vars.insert_or_assign(v.name, v.type);
    ret = fd->return_type;
  } else if (fn == "main") {
    for (const auto& v : p.main_locals) env.vars.insert_or_assign(v.name, v.type);
  }
  for (const auto& [name, value] : locals) {
    (void)value;
    if (name.rfind("$fwd", 0) == 0)
      env.vars.insert_or_assign(name, Type::basic(ret.base()));
  }
  return env;
}

Type return_type_of(const Program& p, const std::string& fn) {
  if (const FunDef* fd = find_fn(p, fn)) return fd->return_type;
  return main_return_type();
}

// Follows values/chains to find the base type a future carries; used
// when allocation metadata is missing (hand-built configurations).
std::optional<Base> chase_base(const Program& p, const Configuration& cn,
                               FutureId f) {
  std::set<FutureId> seen;
  for (;;) {
    if (!seen.insert(f).second) return std::nullopt;  // cycle
    auto it = cn.futures.find(f);
    if (it == cn.futures.end()) return std::nullopt;
    if (const auto* u = std::get_if<Unresolved>(&it->second)) {
      if (u->frames.empty()) return std::nullopt;
      return return_type_of(p, u->frames.front().fn).base();
    }
    if (const auto* c = std::get_if<Chained>(&it->second)) {
      f = c->target;
      continue;
    }
    const Value& w = std::get<Resolved>(it->second).value;
    if (w.is_int()) return Base::Int;
    if (w.is_bool()) return Base::Bool;
    f = w.as_fut();
  }
}

class ConfigChecker {
 public:
  ConfigChecker(const ConfigTypeEnv& omega, const Program& p,
                const Configuration& cn, ForwardMode mode)
      : omega_(omega), p_(p), cn_(cn), mode_(mode) {}

  std::vector<TypeError> run() {
    check_globals();
    for (const auto& [f, state] : cn_.futures) check_future(f, state);
    return std::move(errors_);
  }

 private:
  void err(FutureId f, std::string rule, std::string message) {
    errors_.push_back(
        TypeError{SourceLoc{}, f, std::move(rule), std::move(message)});
  }

  bool inhabits(const Value& w, const Type& t) {
    if (!t.is_flow())
      return t.base() == Base::Int ? w.is_int() : w.is_bool();
    if (w.is_base())
      return t.base() == Base::Int ? w.is_int() : w.is_bool();
    auto b = omega_.future_base(w.as_fut());
    return b && *b == t.base();
  }

  void check_store(FutureId f, const Store& store, const TypeEnv& env,
                   const char* what) {
    for (const auto& [name, value] : store) {
      auto t = env.lookup(name);
      if (!t) {
        err(f, "T-CONFIGURATION",
            std::string(what) + " '" + name + "' has no declared type");
        continue;
      }
      if (!inhabits(value, *t))
        err(f, "T-CONFIGURATION",
            std::string(what) + " '" + name + "' holds " + to_string(value) +
                ", declared " + to_string(*t));
    }
  }

  void check_globals() {
    TypeEnv genv;
    genv.vars = omega_.globals.vars;
    for (const auto& g : p_.globals) {
      if (!cn_.globals.contains(g.name))
        err(kMainFuture, "T-CONFIGURATION",
            "global '" + g.name + "' missing from the store");
    }
    check_store(kMainFuture, cn_.globals, genv, "global");
  }

  // --- runtime statement typing -------------------------------------

  std::optional<Type> atom_type(FutureId f, const TypeEnv& env,
                                const Atom& a) {
    if (const auto* fut = std::get_if<FutLit>(&a.node)) {
      auto b = omega_.future_base(fut->id);
      if (!b) {
        err(f, "T-VAR",
            "future fut#" + std::to_string(fut->id) + " has no type");
        return std::nullopt;
      }
      return Type::flow(*b);
    }
    std::vector<TypeError> local;
    auto t = type_of_atom_static(env, a, local);
    for (auto& e : local) {
      e.future = f;
      errors_.push_back(std::move(e));
    }
    return t;
  }

  static std::optional<Type> type_of_atom_static(
      const TypeEnv& env, const Atom& a, std::vector<TypeError>& errors) {
    // delegate to the static checker through a one-atom rhs
    Rhs r{Expr{a}};
    return type_of_rhs(env, r, errors);
  }

  std::optional<Type> rhs_type(FutureId f, const TypeEnv& env, const Rhs& r) {
    return std::visit(
        [&](const auto& n) -> std::optional<Type> {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Expr>) {
            if (const auto* b = std::get_if<BinOp>(&n.node)) {
              auto lt = atom_type(f, env, b->lhs);
              auto rt = atom_type(f, env, b->rhs);
              if (!lt || !rt) return std::nullopt;
              std::vector<TypeError> local;
              auto t = type_of_rhs(env, Rhs{Expr{*b}}, local);
              // re-run statically only when both operands are static
              if (!local.empty() &&
                  (std::holds_alternative<FutLit>(b->lhs.node) ||
                   std::holds_alternative<FutLit>(b->rhs.node))) {
                err(f, "T-EXPRESSION", "future value in operator position");
                return std::nullopt;
              }
              for (auto& e : local) {
                e.future = f;
                errors_.push_back(std::move(e));
              }
              return t;
            }
            return atom_type(f, env, std::get<Atom>(n.node));
          } else if constexpr (std::is_same_v<T, GetStar>) {
            auto t = atom_type(f, env, n.target);
            if (!t) return std::nullopt;
            return Type::basic(t->base());
          } else if constexpr (std::is_same_v<T, PendingResult>) {
            err(f, "T-CONFIGURATION",
                "pending-result marker outside a caller frame head");
            return std::nullopt;
          } else {
            // calls contain only source atoms; reuse the static checker
            std::vector<TypeError> local;
            auto t = type_of_rhs(env, Rhs{n}, local);
            for (auto& e : local) {
              e.future = f;
              errors_.push_back(std::move(e));
            }
            return t;
          }
        },
        r.node);
  }

  void check_runtime_stmt(FutureId f, const TypeEnv& env, const Type& ret,
                          const std::string& fn, const StmtPtr& s) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Skip>) {
          } else if constexpr (std::is_same_v<T, Assign>) {
            auto target = env.lookup(n.target);
            if (!target)
              err(f, "T-ASSIGN", "unknown variable '" + n.target + "'");
            auto t = rhs_type(f, env, n.rhs);
            if (target && t && !subtype(*t, *target))
              err(f, "T-ASSIGN",
                  "cannot assign " + to_string(*t) + " to '" + n.target +
                      "' of type " + to_string(*target));
          } else if constexpr (std::is_same_v<T, If>) {
            auto c = atom_type(f, env, n.cond);
            if (c && *c != Type::basic(Base::Bool))
              err(f, "T-IF", "condition has type " + to_string(*c));
            check_runtime_stmt(f, env, ret, fn, n.then_branch);
            check_runtime_stmt(f, env, ret, fn, n.else_branch);
          } else if constexpr (std::is_same_v<T, Seq>) {
            check_runtime_stmt(f, env, ret, fn, n.first);
            check_runtime_stmt(f, env, ret, fn, n.second);
          } else if constexpr (std::is_same_v<T, Return>) {
            auto t = atom_type(f, env, n.value);
            if (t && !subtype(*t, ret))
              err(f, "T-RETURN",
                  "returning " + to_string(*t) + " from '" + fn +
                      "' declared " + to_string(ret));
          } else {  // ForwardStar
            if (cn_.dialect == Dialect::Def) {
              err(f, "T-FORWARD", "forward* in a def configuration");
              return;
            }
            auto t = atom_type(f, env, n.value);
            if (!t) return;
            Type want = Type::flow(ret.base());
            if (mode_ == ForwardMode::Strict && !ret.is_flow()) {
              err(f, "T-FORWARD",
                  "forward* in '" + fn + "' declared " + to_string(ret));
              return;
            }
            if (!subtype(*t, want))
              err(f,
                  mode_ == ForwardMode::Strict ? "T-FORWARD" : "T-CEF-FORWARD",
                  "forwarding " + to_string(*t) + " from '" + fn +
                      "' declared " + to_string(ret));
          }
        },
        s->node);
  }

  // --- futures ------------------------------------------------------

  void check_future(FutureId f, const FutureState& state) {
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, Unresolved>) {
            check_unresolved(f, st);
          } else if constexpr (std::is_same_v<T, Resolved>) {
            auto it = omega_.resolved.find(f);
            if (it == omega_.resolved.end()) {
              err(f, "T-CONFIGURATION", "resolved future has no type");
              return;
            }
            if (!it->second.is_flow()) {
              err(f, "T-CONFIGURATION",
                  "future typed " + to_string(it->second) +
                      ", expected a Flow type");
              return;
            }
            if (!inhabits(st.value, it->second))
              err(f, "T-CONFIGURATION",
                  "holds " + to_string(st.value) + ", typed " +
                      to_string(it->second));
          } else {  // Chained
            if (cn_.dialect == Dialect::Def) {
              err(f, "T-CONFIGURATION", "chained future in a def configuration");
              return;
            }
            auto mine = omega_.future_base(f);
            auto theirs = omega_.future_base(st.target);
            if (!mine || !theirs) {
              err(f, "T-CONFIGURATION", "chained future lacks a type");
              return;
            }
            if (*mine != *theirs)
              err(f, "T-CONFIGURATION",
                  "chained to fut#" + std::to_string(st.target) +
                      " carrying " + to_string(*theirs) + ", expected " +
                      to_string(*mine));
          }
        },
        state);
  }

  void check_unresolved(FutureId f, const Unresolved& u) {
    auto it = omega_.pending.find(f);
    if (it == omega_.pending.end()) {
      err(f, "T-CONFIGURATION", "running future missing from omega");
      return;
    }
    if (it->second.size() != u.frames.size()) {
      err(f, "T-CONFIGURATION", "frame stack shape differs from omega");
      return;
    }
    if (u.frames.empty()) {
      err(f, "T-CONFIGURATION", "running future with no frames");
      return;
    }
    for (std::size_t i = 0; i < u.frames.size(); ++i) {
      const Frame& frame = u.frames[i];
      const auto& [env, fn] = it->second[i];
      if (fn != frame.fn) {
        err(f, "T-CONFIGURATION", "frame function differs from omega");
        continue;
      }
      Type ret = return_type_of(p_, fn);
      check_store(f, frame.locals, env, "local");

      StmtPtr body = frame.stmt;
      bool top = i + 1 == u.frames.size();
      if (!top) {
        // a caller must be parked on a pending assignment whose target
        // can accept the callee's return value
        auto [head, tail] = split_head(frame.stmt);
        const auto* asg = std::get_if<Assign>(&head->node);
        if (!asg || !std::holds_alternative<PendingResult>(asg->rhs.node)) {
          err(f, "T-CONFIGURATION",
              "caller frame is not awaiting the callee's result");
          continue;
        }
        Type callee_ret = return_type_of(p_, u.frames[i + 1].fn);
        auto target = env.lookup(asg->target);
        if (!target) {
          err(f, "T-ASSIGN", "unknown variable '" + asg->target + "'");
        } else if (!subtype(callee_ret, *target)) {
          err(f, "T-ASSIGN",
              "callee returns " + to_string(callee_ret) + ", caller stores " +
                  "into '" + asg->target + "' of type " + to_string(*target));
        }
        body = tail;
      }
      check_runtime_stmt(f, env, ret, fn, body);
    }
  }

  const ConfigTypeEnv& omega_;
  const Program& p_;
  const Configuration& cn_;
  ForwardMode mode_;
  std::vector<TypeError> errors_;
};

}  // namespace

ConfigTypeEnv canonical_omega(const Program& p, const Configuration& cn) {
  ConfigTypeEnv omega;
  omega.globals = base_env(p);
  for (const auto& [f, state] : cn.futures) {
    if (const auto* u = std::get_if<Unresolved>(&state)) {
      auto& stack = omega.pending[f];
      for (const auto& frame : u->frames)
        stack.push_back(
            {frame_env(p, omega.globals, frame.fn, frame.locals), frame.fn});
    } else {
      std::optional<Base> b;
      if (auto it = cn.result_base.find(f); it != cn.result_base.end())
        b = it->second;
      else
        b = chase_base(p, cn, f);
      omega.resolved.emplace(f, Type::flow(b.value_or(Base::Int)));
    }
  }
  return omega;
}

std::vector<TypeError> check_configuration(const ConfigTypeEnv& omega,
                                           const Program& p,
                                           const Configuration& cn,
                                           ForwardMode mode) {
  return ConfigChecker(omega, p, cn, mode).run();
}

}  // namespace defcal
