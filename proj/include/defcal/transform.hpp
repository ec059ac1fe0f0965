#pragma once

#include "defcal/ast.hpp"
#include "defcal/typecheck.hpp"

namespace defcal {

// forward* v  ==>  return v, everything else unchanged.
StmtPtr fwd_elim_stmt(const StmtPtr& s);

struct FwdElimResult {
  std::optional<Program> program;
  std::vector<TypeError> errors;
  bool ok() const { return program.has_value(); }
};

// Translates a def+f program into plain def. Rejects programs that
// only typecheck in Flexible mode (a forward* inside a base-returning
// function), since the translation is not behaviour-preserving there.
FwdElimResult fwd_elim(const Program& p);

}  // namespace defcal
