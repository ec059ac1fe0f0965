#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "defcal/ast.hpp"

namespace defcal {

struct ParseError {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  std::string message;
  std::vector<std::string> expected;
};

// "file:line:col: message" (file may be empty -> "line:col: message").
std::string render(const ParseError& e, std::string_view file = "");

struct ParseResult {
  std::optional<Program> program;
  std::vector<ParseError> errors;
  bool ok() const { return program.has_value(); }
};

// Parses a whole program. The dialect is def+f iff a forward* occurs or
// a `#dialect def+f` pragma is present; `forced` (e.g. from a CLI flag)
// overrides, and makes forward* a parse error under Dialect::Def.
ParseResult parse_program(std::string_view source,
                          std::optional<Dialect> forced = std::nullopt);

}  // namespace defcal
