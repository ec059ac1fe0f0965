#include "defcal/transform.hpp"

namespace defcal {

StmtPtr fwd_elim_stmt(const StmtPtr& s) {
  return std::visit(
      [&](const auto& n) -> StmtPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ForwardStar>) {
          return make_stmt(Return{n.value}, s->loc);
        } else if constexpr (std::is_same_v<T, Seq>) {
          StmtPtr first = fwd_elim_stmt(n.first);
          StmtPtr second = fwd_elim_stmt(n.second);
          if (first == n.first && second == n.second) return s;
          return make_stmt(Seq{std::move(first), std::move(second)}, s->loc);
        } else if constexpr (std::is_same_v<T, If>) {
          StmtPtr thn = fwd_elim_stmt(n.then_branch);
          StmtPtr els = fwd_elim_stmt(n.else_branch);
          if (thn == n.then_branch && els == n.else_branch) return s;
          return make_stmt(If{n.cond, std::move(thn), std::move(els)}, s->loc);
        } else {
          return s;
        }
      },
      s->node);
}

FwdElimResult fwd_elim(const Program& p) {
  FwdElimResult result;
  for (const auto& f : p.functions) {
    if (!f.return_type.is_flow() && contains_forward(f.body))
      result.errors.push_back(TypeError{
          f.loc, std::nullopt, "T-FORWARD",
          "cannot eliminate forward* from '" + f.name + "': return type " +
              to_string(f.return_type) + " is not a Flow type"});
  }
  if (!result.errors.empty()) return result;
  Program out = p;
  for (auto& f : out.functions) f.body = fwd_elim_stmt(f.body);
  out.main_body = fwd_elim_stmt(out.main_body);
  out.dialect = Dialect::Def;
  result.program = std::move(out);
  return result;
}

}  // namespace defcal
