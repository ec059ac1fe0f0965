#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace defcal {

// ---------------------------------------------------------------------------
// dialects and types
// ---------------------------------------------------------------------------

enum class Dialect { Def, DefPlusF };

enum class Base { Int, Bool };

// T ::= int | bool | Flow[int] | Flow[bool].
// Nested flows are unrepresentable; collapse() handles the transient
// Flow[Flow[B]] that appears while typing an async invocation.
class Type {
 public:
  static Type basic(Base b) { return Type(b, false); }
  static Type flow(Base b) { return Type(b, true); }

  bool is_flow() const { return flow_; }
  Base base() const { return base_; }

  bool operator==(const Type&) const = default;

 private:
  Type(Base b, bool f) : base_(b), flow_(f) {}
  Base base_;
  bool flow_;
};

// A possibly nested flow type, only ever built transiently by the
// typechecker before collapsing: base wrapped in `depth` Flow layers.
struct NestedFlowType {
  Base base;
  int depth = 0;
};

std::string to_string(Base b);
std::string to_string(const Type& t);

// ---------------------------------------------------------------------------
// source positions (ignored by structural equality)
// ---------------------------------------------------------------------------

struct SourceLoc {
  int line = 0;  // 1-based; 0 = synthetic node
  int column = 0;
};

// ---------------------------------------------------------------------------
// atoms and expressions
// ---------------------------------------------------------------------------

using FutureId = std::uint32_t;

struct VarRef {
  std::string name;
  bool operator==(const VarRef&) const = default;
};
struct IntLit {
  std::int64_t value = 0;
  bool operator==(const IntLit&) const = default;
};
struct BoolLit {
  bool value = false;
  bool operator==(const BoolLit&) const = default;
};
// Runtime-only atom: a future id substituted into a statement by the
// semantics. Never produced by the parser.
struct FutLit {
  FutureId id = 0;
  bool operator==(const FutLit&) const = default;
};

struct Atom {
  std::variant<VarRef, IntLit, BoolLit, FutLit> node;
  SourceLoc loc;
};
bool operator==(const Atom& a, const Atom& b);

enum class BinaryOp { Add, Sub, Mul, Eq, Lt, Le, And, Or };

std::string to_string(BinaryOp op);

struct BinOp {
  Atom lhs;
  BinaryOp op;
  Atom rhs;
};
bool operator==(const BinOp& a, const BinOp& b);

struct Expr {
  std::variant<Atom, BinOp> node;
};
bool operator==(const Expr& a, const Expr& b);

// ---------------------------------------------------------------------------
// right-hand sides
// ---------------------------------------------------------------------------

struct SyncCall {
  std::string fn;
  std::vector<Atom> args;
  SourceLoc loc;
};
struct AsyncCall {
  std::string fn;
  std::vector<Atom> args;
  SourceLoc loc;
};
struct GetStar {
  Atom target;
};
// Caller-side marker while a synchronous callee runs; the matching
// return pops the callee and fills the assignment in one step.
struct PendingResult {
  bool operator==(const PendingResult&) const = default;
};

struct Rhs {
  std::variant<Expr, SyncCall, AsyncCall, GetStar, PendingResult> node;
};
bool operator==(const SyncCall& a, const SyncCall& b);
bool operator==(const AsyncCall& a, const AsyncCall& b);
bool operator==(const GetStar& a, const GetStar& b);
bool operator==(const Rhs& a, const Rhs& b);

// ---------------------------------------------------------------------------
// statements
// ---------------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Skip {};
struct Assign {
  std::string target;
  Rhs rhs;
};
struct If {
  Atom cond;
  StmtPtr then_branch;
  StmtPtr else_branch;
};
struct Seq {
  StmtPtr first;
  StmtPtr second;
};
struct Return {
  Atom value;
};
struct ForwardStar {
  Atom value;
};

struct Stmt {
  std::variant<Skip, Assign, If, Seq, Return, ForwardStar> node;
  SourceLoc loc;
};

bool operator==(const Skip& a, const Skip& b);
bool operator==(const Assign& a, const Assign& b);
bool operator==(const If& a, const If& b);
bool operator==(const Seq& a, const Seq& b);
bool operator==(const Return& a, const Return& b);
bool operator==(const ForwardStar& a, const ForwardStar& b);
bool operator==(const Stmt& a, const Stmt& b);
bool stmt_equal(const StmtPtr& a, const StmtPtr& b);

StmtPtr make_stmt(Skip s, SourceLoc loc = {});
StmtPtr make_stmt(Assign s, SourceLoc loc = {});
StmtPtr make_stmt(If s, SourceLoc loc = {});
StmtPtr make_stmt(Seq s, SourceLoc loc = {});
StmtPtr make_stmt(Return s, SourceLoc loc = {});
StmtPtr make_stmt(ForwardStar s, SourceLoc loc = {});

Atom var_atom(std::string name, SourceLoc loc = {});
Atom int_atom(std::int64_t v, SourceLoc loc = {});
Atom bool_atom(bool v, SourceLoc loc = {});
Atom fut_atom(FutureId f);

// ---------------------------------------------------------------------------
// declarations and programs
// ---------------------------------------------------------------------------

struct VarDecl {
  std::string name;
  Type type;
  SourceLoc loc;
};
bool operator==(const VarDecl& a, const VarDecl& b);

struct FunDef {
  Type return_type;
  std::string name;
  std::vector<VarDecl> params;
  std::vector<VarDecl> locals;
  StmtPtr body;
  SourceLoc loc;
};
bool operator==(const FunDef& a, const FunDef& b);

struct Program {
  std::vector<VarDecl> globals;
  std::vector<FunDef> functions;
  std::vector<VarDecl> main_locals;
  StmtPtr main_body;
  Dialect dialect = Dialect::Def;
};
bool operator==(const Program& a, const Program& b);

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

// Rewrites a statement into the executable normal form: Seq chains
// right-associated, if-branches normalized recursively, and a trailing
// skip appended when the final leaf is return/forward* so the last
// action still has the `s'; s''` shape the reduction rules match on.
// Leading skips are preserved. Idempotent.
StmtPtr normalize(const StmtPtr& s);
Program normalize_program(Program p);

bool is_normalized(const StmtPtr& s);

// Head/tail view used by the semantics: Seq(a, b) -> (a, b); a lone
// non-Seq statement s is read as (s, skip).
std::pair<StmtPtr, StmtPtr> split_head(const StmtPtr& s);

// True iff the statement contains a forward* anywhere.
bool contains_forward(const StmtPtr& s);
bool contains_forward(const Program& p);

// Pretty-printer. Output is the normalized program; reparsing it yields
// an AST structurally equal to normalize_program(p).
std::string pretty(const Program& p);
// Single-line rendering used in traces and diagnostics.
std::string to_string(const StmtPtr& s);
std::string to_string(const Atom& a);
std::string to_string(const Rhs& r);

bool is_reserved_word(std::string_view w);

}  // namespace defcal
