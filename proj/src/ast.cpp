#include "defcal/ast.hpp"

#include <array>
#include <sstream>
#include <unordered_set>

namespace defcal {

std::string to_string(Base b) { return b == Base::Int ? "int" : "bool"; }

std::string to_string(const Type& t) {
  if (t.is_flow()) return "Flow[" + to_string(t.base()) + "]";
  return to_string(t.base());
}

std::string to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

// --- structural equality (source positions ignored) ---

bool operator==(const Atom& a, const Atom& b) { return a.node == b.node; }

bool operator==(const BinOp& a, const BinOp& b) {
  return a.lhs == b.lhs && a.op == b.op && a.rhs == b.rhs;
}

bool operator==(const Expr& a, const Expr& b) { return a.node == b.node; }

bool operator==(const SyncCall& a, const SyncCall& b) {
  return a.fn == b.fn && a.args == b.args;
}
bool operator==(const AsyncCall& a, const AsyncCall& b) {
  return a.fn == b.fn && a.args == b.args;
}
bool operator==(const GetStar& a, const GetStar& b) {
  return a.target == b.target;
}
bool operator==(const Rhs& a, const Rhs& b) { return a.node == b.node; }

bool operator==(const Skip&, const Skip&) { return true; }
bool operator==(const Assign& a, const Assign& b) {
  return a.target == b.target && a.rhs == b.rhs;
}
bool operator==(const If& a, const If& b) {
  return a.cond == b.cond && stmt_equal(a.then_branch, b.then_branch) &&
         stmt_equal(a.else_branch, b.else_branch);
}
bool operator==(const Seq& a, const Seq& b) {
  return stmt_equal(a.first, b.first) && stmt_equal(a.second, b.second);
}
bool operator==(const Return& a, const Return& b) { return a.value == b.value; }
bool operator==(const ForwardStar& a, const ForwardStar& b) {
  return a.value == b.value;
}

bool operator==(const Stmt& a, const Stmt& b) { return a.node == b.node; }

bool stmt_equal(const StmtPtr& a, const StmtPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool operator==(const VarDecl& a, const VarDecl& b) {
  return a.name == b.name && a.type == b.type;
}

bool operator==(const FunDef& a, const FunDef& b) {
  return a.return_type == b.return_type && a.name == b.name &&
         a.params == b.params && a.locals == b.locals &&
         stmt_equal(a.body, b.body);
}

bool operator==(const Program& a, const Program& b) {
  return a.globals == b.globals && a.functions == b.functions &&
         a.main_locals == b.main_locals &&
         stmt_equal(a.main_body, b.main_body) && a.dialect == b.dialect;
}

// --- constructors ---

namespace {
template <class Node>
StmtPtr mk(Node&& n, SourceLoc loc) {
  return std::make_shared<const Stmt>(Stmt{std::forward<Node>(n), loc});
}
}  // namespace

StmtPtr make_stmt(Skip s, SourceLoc loc) { return mk(std::move(s), loc); }
StmtPtr make_stmt(Assign s, SourceLoc loc) { return mk(std::move(s), loc); }
StmtPtr make_stmt(If s, SourceLoc loc) { return mk(std::move(s), loc); }
StmtPtr make_stmt(Seq s, SourceLoc loc) { return mk(std::move(s), loc); }
StmtPtr make_stmt(Return s, SourceLoc loc) { return mk(std::move(s), loc); }
StmtPtr make_stmt(ForwardStar s, SourceLoc loc) { return mk(std::move(s), loc); }

Atom var_atom(std::string name, SourceLoc loc) {
  return Atom{VarRef{std::move(name)}, loc};
}
Atom int_atom(std::int64_t v, SourceLoc loc) { return Atom{IntLit{v}, loc}; }
Atom bool_atom(bool v, SourceLoc loc) { return Atom{BoolLit{v}, loc}; }
Atom fut_atom(FutureId f) { return Atom{FutLit{f}, {}}; }

// --- normalization ---

namespace {

void flatten(const StmtPtr& s, std::vector<StmtPtr>& out) {
  if (const auto* seq = std::get_if<Seq>(&s->node)) {
    flatten(seq->first, out);
    flatten(seq->second, out);
    return;
  }
  if (const auto* br = std::get_if<If>(&s->node)) {
    StmtPtr t = normalize(br->then_branch);
    StmtPtr e = normalize(br->else_branch);
    if (t == br->then_branch && e == br->else_branch) {
      out.push_back(s);
    } else {
      out.push_back(
          make_stmt(If{br->cond, std::move(t), std::move(e)}, s->loc));
    }
    return;
  }
  out.push_back(s);
}

bool ends_task(const StmtPtr& s) {
  return std::holds_alternative<Return>(s->node) ||
         std::holds_alternative<ForwardStar>(s->node);
}

}  // namespace

StmtPtr normalize(const StmtPtr& s) {
  std::vector<StmtPtr> leaves;
  flatten(s, leaves);
  if (ends_task(leaves.back())) leaves.push_back(make_stmt(Skip{}));
  StmtPtr acc = leaves.back();
  for (auto it = leaves.rbegin() + 1; it != leaves.rend(); ++it)
    acc = make_stmt(Seq{*it, std::move(acc)}, (*it)->loc);
  return acc;
}

Program normalize_program(Program p) {
  for (auto& f : p.functions) f.body = normalize(f.body);
  p.main_body = normalize(p.main_body);
  return p;
}

bool is_normalized(const StmtPtr& s) {
  return stmt_equal(s, normalize(s));
}

std::pair<StmtPtr, StmtPtr> split_head(const StmtPtr& s) {
  if (const auto* seq = std::get_if<Seq>(&s->node))
    return {seq->first, seq->second};
  return {s, make_stmt(Skip{})};
}

bool contains_forward(const StmtPtr& s) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ForwardStar>) {
          return true;
        } else if constexpr (std::is_same_v<T, Seq>) {
          return contains_forward(n.first) || contains_forward(n.second);
        } else if constexpr (std::is_same_v<T, If>) {
          return contains_forward(n.then_branch) ||
                 contains_forward(n.else_branch);
        } else {
          return false;
        }
      },
      s->node);
}

bool contains_forward(const Program& p) {
  for (const auto& f : p.functions)
    if (contains_forward(f.body)) return true;
  return contains_forward(p.main_body);
}

// --- printing ---

std::string to_string(const Atom& a) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarRef>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, IntLit>) {
          return std::to_string(n.value);
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return n.value ? "true" : "false";
        } else {
          return "fut#" + std::to_string(n.id);
        }
      },
      a.node);
}

std::string to_string(const Rhs& r) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr>) {
          if (const auto* b = std::get_if<BinOp>(&n.node))
            return to_string(b->lhs) + " " + to_string(b->op) + " " +
                   to_string(b->rhs);
          return to_string(std::get<Atom>(n.node));
        } else if constexpr (std::is_same_v<T, SyncCall> ||
                             std::is_same_v<T, AsyncCall>) {
          std::string out = std::is_same_v<T, AsyncCall> ? "!" : "";
          out += n.fn + "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            out += to_string(n.args[i]);
          }
          return out + ")";
        } else if constexpr (std::is_same_v<T, GetStar>) {
          return "get* " + to_string(n.target);
        } else {
          return "<hole>";
        }
      },
      r.node);
}

namespace {

void print_stmt(const StmtPtr& s, std::ostringstream& out, int indent,
                bool flat) {
  auto pad = [&] {
    if (!flat)
      for (int i = 0; i < indent; ++i) out << "  ";
  };
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Skip>) {
          pad();
          out << "skip";
        } else if constexpr (std::is_same_v<T, Assign>) {
          pad();
          out << n.target << " = " << to_string(n.rhs);
        } else if constexpr (std::is_same_v<T, If>) {
          pad();
          out << "if " << to_string(n.cond) << " {";
          out << (flat ? " " : "\n");
          print_stmt(n.then_branch, out, indent + 1, flat);
          out << (flat ? " " : "\n");
          pad();
          out << "} else {";
          out << (flat ? " " : "\n");
          print_stmt(n.else_branch, out, indent + 1, flat);
          out << (flat ? " " : "\n");
          pad();
          out << "}";
        } else if constexpr (std::is_same_v<T, Seq>) {
          print_stmt(n.first, out, indent, flat);
          out << ";" << (flat ? " " : "\n");
          print_stmt(n.second, out, indent, flat);
        } else if constexpr (std::is_same_v<T, Return>) {
          pad();
          out << "return " << to_string(n.value);
        } else {
          pad();
          out << "forward* " << to_string(n.value);
        }
      },
      s->node);
}

}  // namespace

std::string to_string(const StmtPtr& s) {
  std::ostringstream out;
  print_stmt(s, out, 0, /*flat=*/true);
  return out.str();
}

std::string pretty(const Program& p) {
  Program norm = normalize_program(p);
  std::ostringstream out;
  if (norm.dialect == Dialect::DefPlusF) out << "#dialect def+f\n";
  for (const auto& g : norm.globals)
    out << to_string(g.type) << " " << g.name << ";\n";
  for (const auto& f : norm.functions) {
    out << "fun " << to_string(f.return_type) << " " << f.name << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) out << ", ";
      out << to_string(f.params[i].type) << " " << f.params[i].name;
    }
    out << ") {\n";
    for (const auto& l : f.locals)
      out << "  " << to_string(l.type) << " " << l.name << ";\n";
    print_stmt(f.body, out, 1, /*flat=*/false);
    out << "\n}\n";
  }
  out << "{\n";
  for (const auto& l : norm.main_locals)
    out << "  " << to_string(l.type) << " " << l.name << ";\n";
  print_stmt(norm.main_body, out, 1, /*flat=*/false);
  out << "\n}\n";
  return out.str();
}

bool is_reserved_word(std::string_view w) {
  static const std::unordered_set<std::string_view> words = {
      "skip", "if",  "else", "return", "forward*", "get*", "true",
      "false", "int", "bool", "Flow",   "fun",      "main"};
  return words.contains(w);
}

}  // namespace defcal
