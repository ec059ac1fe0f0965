#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "defcal/runtime.hpp"
#include "defcal/typecheck.hpp"

namespace defcal {

// Typing environment for a whole configuration: the global environment,
// one (env, function) pair per live frame of each running future, and a
// result type for every resolved or chained future.
struct ConfigTypeEnv {
  TypeEnv globals;
  // per future, bottom..top, matching the frame stack
  std::map<FutureId, std::vector<std::pair<TypeEnv, std::string>>> pending;
  std::map<FutureId, Type> resolved;

  // Base type carried by future f, whichever table it lives in.
  std::optional<Base> future_base(FutureId f) const;
};

// Reconstructs the environment a preservation check needs from the
// state itself: frame environments from the function declarations (plus
// any runtime-inserted $fwd locals), result types from the allocation
// metadata, falling back to chasing the value chain.
ConfigTypeEnv canonical_omega(const Program& p, const Configuration& cn);

// Checks a configuration against omega: stores inhabit their declared
// types, frame statements stay well-typed (with future ids typed via
// omega), callers below a callee await its result at a compatible type,
// and resolved/chained futures carry what omega says they do.
std::vector<TypeError> check_configuration(const ConfigTypeEnv& omega,
                                           const Program& p,
                                           const Configuration& cn,
                                           ForwardMode mode);

}  // namespace defcal
