#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "defcal/parser.hpp"
#include "defcal/typecheck.hpp"

namespace defcal::testing {

inline std::filesystem::path corpus_dir() {
  return std::filesystem::path(DEFCAL_CORPUS_DIR);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Parses or throws with the rendered error; keeps test bodies terse.
inline Program parse_or_die(std::string_view source) {
  ParseResult r = parse_program(source);
  if (!r.ok()) throw std::runtime_error("parse: " + render(r.errors.front()));
  return *r.program;
}

inline Program load_corpus(const std::string& name) {
  return parse_or_die(slurp(corpus_dir() / name));
}

}  // namespace defcal::testing
