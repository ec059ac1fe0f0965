#include "defcal/runtime.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace defcal {

std::string to_string(const Value& w) {
  if (w.is_int()) return std::to_string(w.as_int());
  if (w.is_bool()) return w.as_bool() ? "true" : "false";
  return "fut#" + std::to_string(w.as_fut());
}

Value init_value(const Type& t) {
  // flow-typed variables start pre-resolved at the base default
  return t.base() == Base::Int ? Value::of_int(0) : Value::of_bool(false);
}

Value eval(const Store& globals, const Store& locals, const Atom& a) {
  return std::visit(
      [&](const auto& n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarRef>) {
          if (auto it = locals.find(n.name); it != locals.end())
            return it->second;
          if (auto it = globals.find(n.name); it != globals.end())
            return it->second;
          throw RuntimeFault("unbound variable '" + n.name + "'");
        } else if constexpr (std::is_same_v<T, IntLit>) {
          return Value::of_int(n.value);
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return Value::of_bool(n.value);
        } else {
          return Value::of_fut(n.id);
        }
      },
      a.node);
}

namespace {

std::int64_t want_int(const Value& w, BinaryOp op) {
  if (!w.is_int())
    throw RuntimeFault("operator '" + to_string(op) +
                       "' applied to non-integer " + to_string(w));
  return w.as_int();
}

bool want_bool(const Value& w, BinaryOp op) {
  if (!w.is_bool())
    throw RuntimeFault("operator '" + to_string(op) +
                       "' applied to non-boolean " + to_string(w));
  return w.as_bool();
}

}  // namespace

Value eval(const Store& globals, const Store& locals, const Expr& e) {
  if (const auto* a = std::get_if<Atom>(&e.node))
    return eval(globals, locals, *a);
  const auto& b = std::get<BinOp>(e.node);
  Value l = eval(globals, locals, b.lhs);
  Value r = eval(globals, locals, b.rhs);
  switch (b.op) {
    case BinaryOp::Add: return Value::of_int(want_int(l, b.op) + want_int(r, b.op));
    case BinaryOp::Sub: return Value::of_int(want_int(l, b.op) - want_int(r, b.op));
    case BinaryOp::Mul: return Value::of_int(want_int(l, b.op) * want_int(r, b.op));
    case BinaryOp::Lt: return Value::of_bool(want_int(l, b.op) < want_int(r, b.op));
    case BinaryOp::Le: return Value::of_bool(want_int(l, b.op) <= want_int(r, b.op));
    case BinaryOp::Eq:
      if (l.is_int() && r.is_int()) return Value::of_bool(l.as_int() == r.as_int());
      if (l.is_bool() && r.is_bool()) return Value::of_bool(l.as_bool() == r.as_bool());
      throw RuntimeFault("operator '==' applied to " + to_string(l) + " and " +
                         to_string(r));
    case BinaryOp::And: return Value::of_bool(want_bool(l, b.op) && want_bool(r, b.op));
    case BinaryOp::Or: return Value::of_bool(want_bool(l, b.op) || want_bool(r, b.op));
  }
  throw RuntimeFault("unknown operator");
}

void store_update(Store& globals, Store& locals, const std::string& x,
                  Value w) {
  if (auto it = locals.find(x); it != locals.end()) {
    it->second = std::move(w);
    return;
  }
  if (auto it = globals.find(x); it != globals.end()) {
    it->second = std::move(w);
    return;
  }
  throw RuntimeFault("write to unbound variable '" + x + "'");
}

Atom atom_of(const Value& w) {
  if (w.is_int()) return int_atom(w.as_int());
  if (w.is_bool()) return bool_atom(w.as_bool());
  return fut_atom(w.as_fut());
}

bool operator==(const Frame& a, const Frame& b) {
  return a.locals == b.locals && a.fn == b.fn && stmt_equal(a.stmt, b.stmt);
}

bool operator==(const Unresolved& a, const Unresolved& b) {
  return a.frames == b.frames;
}

bool operator==(const Configuration& a, const Configuration& b) {
  return a.next_id == b.next_id && a.dialect == b.dialect &&
         a.globals == b.globals && a.futures == b.futures;
}

std::string to_string(Rule r) {
  switch (r) {
    case Rule::Skip: return "SKIP";
    case Rule::Assign: return "ASSIGN";
    case Rule::IfTrue: return "IF-TRUE";
    case Rule::IfFalse: return "IF-FALSE";
    case Rule::InvkSync: return "INVK-SYNC";
    case Rule::InvkAsync: return "INVK-ASYNC";
    case Rule::ReturnSync: return "RETURN-SYNC";
    case Rule::ReturnAsync: return "RETURN-ASYNC";
    case Rule::GetFuture: return "GET-FUTURE";
    case Rule::GetData: return "GET-DATA";
    case Rule::ForwardSync: return "FORWARD-SYNC";
    case Rule::ForwardAsync: return "FORWARD-ASYNC";
    case Rule::ForwardData: return "FORWARD-DATA";
    case Rule::ChainUpdate: return "CHAIN-UPDATE";
    case Rule::CefForwardSync: return "CEF-FORWARD-SYNC";
  }
  return "?";
}

std::string to_string(const TransitionLabel& l) {
  return to_string(l.rule) + "@f" + std::to_string(l.actor);
}

FunctionTable FunctionTable::build(const Program& p) {
  FunctionTable t;
  t.program = &p;
  for (const auto& f : p.functions) t.by_name.emplace(f.name, &f);
  return t;
}

const FunDef& FunctionTable::get(const std::string& name) const {
  auto it = by_name.find(name);
  if (it == by_name.end())
    throw RuntimeFault("call to unknown function '" + name + "'");
  return *it->second;
}

Frame bind_frame(const FunDef& fn, const std::vector<Value>& args) {
  if (args.size() != fn.params.size())
    throw RuntimeFault("arity mismatch calling '" + fn.name + "'");
  Frame frame;
  for (std::size_t i = 0; i < args.size(); ++i)
    frame.locals.emplace(fn.params[i].name, args[i]);
  for (const auto& l : fn.locals)
    frame.locals.emplace(l.name, init_value(l.type));
  frame.stmt = normalize(fn.body);
  frame.fn = fn.name;
  return frame;
}

Configuration initial_configuration(const Program& p) {
  Configuration cn;
  cn.dialect = p.dialect;
  for (const auto& g : p.globals)
    cn.globals.emplace(g.name, init_value(g.type));
  Frame main_frame;
  for (const auto& l : p.main_locals)
    main_frame.locals.emplace(l.name, init_value(l.type));
  main_frame.stmt = normalize(p.main_body);
  main_frame.fn = "main";
  cn.futures.emplace(kMainFuture, Unresolved{{std::move(main_frame)}});
  cn.result_base.emplace(kMainFuture, main_return_type().base());
  cn.next_id = 1;
  return cn;
}

namespace {

std::vector<Value> eval_args(const Store& globals, const Store& locals,
                             const std::vector<Atom>& args) {
  std::vector<Value> out;
  out.reserve(args.size());
  for (const auto& a : args) out.push_back(eval(globals, locals, a));
  return out;
}

// Picks a local name of the shape $fwd<N> not yet bound in the frame.
std::string fresh_fwd_name(const Store& locals) {
  for (int n = 0;; ++n) {
    std::string name = "$fwd" + std::to_string(n);
    if (!locals.contains(name)) return name;
  }
}

struct StepBuilder {
  const FunctionTable& fns;
  const Configuration& cn;
  ForwardMode mode;
  std::vector<std::pair<TransitionLabel, Configuration>> out;

  void emit(Rule rule, FutureId actor, Configuration next) {
    out.push_back({TransitionLabel{rule, actor}, std::move(next)});
  }

  // transition of the task of future f, if any
  void task_step(FutureId f, const Unresolved& u) {
    const Frame& top = u.frames.back();
    auto [head, tail] = split_head(top.stmt);

    auto with_top = [&](auto&& edit) {
      Configuration next = cn;
      auto& frames = std::get<Unresolved>(next.futures.at(f)).frames;
      edit(next, frames);
      return next;
    };

    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Skip>) {
            emit(Rule::Skip, f, with_top([&](Configuration&, auto& frames) {
                   frames.back().stmt = tail;
                 }));
          } else if constexpr (std::is_same_v<T, Assign>) {
            assign_step(f, top, n, tail, with_top);
          } else if constexpr (std::is_same_v<T, If>) {
            Value c = eval(cn.globals, top.locals, n.cond);
            if (!c.is_bool())
              throw RuntimeFault("if condition evaluated to " + to_string(c));
            const StmtPtr& branch = c.as_bool() ? n.then_branch : n.else_branch;
            StmtPtr merged = normalize(make_stmt(Seq{branch, tail}));
            emit(c.as_bool() ? Rule::IfTrue : Rule::IfFalse, f,
                 with_top([&](Configuration&, auto& frames) {
                   frames.back().stmt = merged;
                 }));
          } else if constexpr (std::is_same_v<T, Seq>) {
            throw RuntimeFault("statement not in normal form");
          } else if constexpr (std::is_same_v<T, Return>) {
            Value w = eval(cn.globals, top.locals, n.value);
            if (u.frames.size() > 1) {
              emit(Rule::ReturnSync, f,
                   with_top([&](Configuration& next, auto& frames) {
                     frames.pop_back();
                     fill_pending(next, frames.back(), w);
                   }));
            } else {
              Configuration next = cn;
              next.futures.at(f) = Resolved{w};
              emit(Rule::ReturnAsync, f, std::move(next));
            }
          } else {  // ForwardStar
            forward_step(f, u, top, n, tail, with_top);
          }
        },
        head->node);
  }

  template <class WithTop>
  void assign_step(FutureId f, const Frame& top, const Assign& n,
                   const StmtPtr& tail, WithTop&& with_top) {
    std::visit(
        [&](const auto& r) {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, Expr>) {
            Value w = eval(cn.globals, top.locals, r);
            emit(Rule::Assign, f,
                 with_top([&](Configuration& next, auto& frames) {
                   store_update(next.globals, frames.back().locals, n.target,
                                w);
                   frames.back().stmt = tail;
                 }));
          } else if constexpr (std::is_same_v<R, SyncCall>) {
            Frame callee =
                bind_frame(fns.get(r.fn), eval_args(cn.globals, top.locals, r.args));
            emit(Rule::InvkSync, f,
                 with_top([&](Configuration&, auto& frames) {
                   frames.back().stmt = make_stmt(
                       Seq{make_stmt(Assign{n.target, Rhs{PendingResult{}}}),
                           tail});
                   frames.push_back(callee);
                 }));
          } else if constexpr (std::is_same_v<R, AsyncCall>) {
            const FunDef& fd = fns.get(r.fn);
            Frame callee = bind_frame(fd, eval_args(cn.globals, top.locals, r.args));
            emit(Rule::InvkAsync, f,
                 with_top([&](Configuration& next, auto& frames) {
                   FutureId fresh = next.next_id++;
                   next.futures.emplace(fresh, Unresolved{{callee}});
                   next.result_base.emplace(fresh, fd.return_type.base());
                   store_update(next.globals, frames.back().locals, n.target,
                                Value::of_fut(fresh));
                   frames.back().stmt = tail;
                 }));
          } else if constexpr (std::is_same_v<R, GetStar>) {
            Value w = eval(cn.globals, top.locals, r.target);
            if (w.is_base()) {
              emit(Rule::GetData, f,
                   with_top([&](Configuration& next, auto& frames) {
                     store_update(next.globals, frames.back().locals, n.target,
                                  w);
                     frames.back().stmt = tail;
                   }));
              return;
            }
            auto it = cn.futures.find(w.as_fut());
            if (it == cn.futures.end())
              throw RuntimeFault("get* on unknown future");
            if (const auto* res = std::get_if<Resolved>(&it->second)) {
              Atom next_target = atom_of(res->value);
              emit(Rule::GetFuture, f,
                   with_top([&](Configuration&, auto& frames) {
                     frames.back().stmt = make_stmt(
                         Seq{make_stmt(Assign{n.target, Rhs{GetStar{next_target}}}),
                             tail});
                   }));
            }
            // unresolved or chained target: blocked, no transition
          } else {
            // pending-result marker: the callee above will fill it
          }
        },
        n.rhs.node);
  }

  template <class WithTop>
  void forward_step(FutureId f, const Unresolved& u, const Frame& top,
                    const ForwardStar& n, const StmtPtr& tail,
                    WithTop&& with_top) {
    if (cn.dialect != Dialect::DefPlusF)
      throw RuntimeFault("forward* in a def configuration");
    Value w = eval(cn.globals, top.locals, n.value);
    if (u.frames.size() == 1) {
      Configuration next = cn;
      if (w.is_fut())
        next.futures.at(f) = Chained{w.as_fut()};
      else
        next.futures.at(f) = Resolved{w};
      emit(w.is_fut() ? Rule::ForwardAsync : Rule::ForwardData, f,
           std::move(next));
      return;
    }
    if (mode == ForwardMode::Strict) {
      emit(Rule::ForwardSync, f, with_top([&](Configuration&, auto& frames) {
             frames.back().stmt =
                 make_stmt(Seq{make_stmt(Return{atom_of(w)}), tail});
           }));
      return;
    }
    // flexible: synchronize on the forwarded value here, then return it
    const FunDef& fd = fns.get(top.fn);
    std::string y = fresh_fwd_name(top.locals);
    emit(Rule::CefForwardSync, f, with_top([&](Configuration&, auto& frames) {
           Frame& fr = frames.back();
           fr.locals.emplace(y, init_value(fd.return_type));
           fr.stmt = make_stmt(
               Seq{make_stmt(Assign{y, Rhs{GetStar{atom_of(w)}}}),
                   make_stmt(Seq{make_stmt(Return{var_atom(y)}), tail})});
         }));
  }

  void fill_pending(Configuration& next, Frame& caller, const Value& w) {
    auto [head, tail] = split_head(caller.stmt);
    const auto* asg = std::get_if<Assign>(&head->node);
    if (!asg || !std::holds_alternative<PendingResult>(asg->rhs.node))
      throw RuntimeFault("caller frame is not awaiting a result");
    store_update(next.globals, caller.locals, asg->target, w);
    caller.stmt = tail;
  }

  void chain_step(FutureId f, const Chained& c) {
    auto it = cn.futures.find(c.target);
    if (it == cn.futures.end()) throw RuntimeFault("chain to unknown future");
    if (const auto* res = std::get_if<Resolved>(&it->second)) {
      Configuration next = cn;
      next.futures.at(f) = Resolved{res->value};
      emit(Rule::ChainUpdate, f, std::move(next));
    }
  }
};

}  // namespace

std::vector<std::pair<TransitionLabel, Configuration>> enabled_transitions(
    const FunctionTable& fns, const Configuration& cn, ForwardMode mode) {
  StepBuilder builder{fns, cn, mode, {}};
  for (const auto& [f, state] : cn.futures) {
    if (const auto* u = std::get_if<Unresolved>(&state)) {
      builder.task_step(f, *u);
    } else if (const auto* c = std::get_if<Chained>(&state)) {
      builder.chain_step(f, *c);
    }
  }
  return std::move(builder.out);
}

std::vector<std::pair<TransitionLabel, Configuration>> enabled_transitions(
    const Program& p, const Configuration& cn, ForwardMode mode) {
  return enabled_transitions(FunctionTable::build(p), cn, mode);
}

std::optional<FutureId> blocked_target(const Configuration& cn,
                                       const FutureState& state) {
  if (const auto* c = std::get_if<Chained>(&state)) return c->target;
  const auto* u = std::get_if<Unresolved>(&state);
  if (!u) return std::nullopt;
  auto [head, tail] = split_head(u->frames.back().stmt);
  const auto* asg = std::get_if<Assign>(&head->node);
  if (!asg) return std::nullopt;
  const auto* get = std::get_if<GetStar>(&asg->rhs.node);
  if (!get) return std::nullopt;
  Value w = eval(cn.globals, u->frames.back().locals, get->target);
  if (!w.is_fut()) return std::nullopt;
  auto it = cn.futures.find(w.as_fut());
  if (it != cn.futures.end() && std::holds_alternative<Resolved>(it->second))
    return std::nullopt;  // actually enabled
  return w.as_fut();
}

Classification classify(const FunctionTable& fns, const Configuration& cn,
                        ForwardMode mode) {
  Classification result;
  if (!enabled_transitions(fns, cn, mode).empty()) {
    result.kind = Classification::Running;
    return result;
  }
  bool all_resolved = true;
  for (const auto& [f, state] : cn.futures) {
    if (std::holds_alternative<Resolved>(state)) continue;
    all_resolved = false;
    if (auto target = blocked_target(cn, state))
      result.waits.push_back({f, *target});
  }
  result.kind =
      all_resolved ? Classification::Terminated : Classification::Deadlocked;
  return result;
}

std::optional<Value> final_value(const Configuration& cn, FutureId f) {
  std::set<FutureId> seen;
  for (;;) {
    if (!seen.insert(f).second) return std::nullopt;  // reference cycle
    auto it = cn.futures.find(f);
    if (it == cn.futures.end()) return std::nullopt;
    if (const auto* c = std::get_if<Chained>(&it->second)) {
      f = c->target;
      continue;
    }
    const auto* r = std::get_if<Resolved>(&it->second);
    if (!r) return std::nullopt;
    if (r->value.is_base()) return r->value;
    f = r->value.as_fut();
  }
}

}  // namespace defcal
