#include "defcal/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

namespace defcal {

std::string render(const ParseError& e, std::string_view file) {
  std::ostringstream out;
  if (!file.empty()) out << file << ":";
  out << e.line << ":" << e.column << ": " << e.message;
  if (!e.expected.empty()) {
    out << " (expected ";
    for (std::size_t i = 0; i < e.expected.size(); ++i) {
      if (i) out << " or ";
      out << e.expected[i];
    }
    out << ")";
  }
  return out.str();
}

namespace {

enum class Tok {
  Ident, IntLit,
  KwSkip, KwIf, KwElse, KwReturn, KwTrue, KwFalse,
  KwInt, KwBool, KwFlow, KwFun, KwForward, KwGet,
  LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Semi, Comma, Assign, Bang, Hash,
  Plus, Minus, Star, EqEq, Lt, Le, AndAnd, OrOr,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::int64_t value = 0;
  SourceLoc loc;
};

std::string describe(Tok k) {
  switch (k) {
    case Tok::Ident: return "identifier";
    case Tok::IntLit: return "integer";
    case Tok::KwSkip: return "'skip'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwReturn: return "'return'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwInt: return "'int'";
    case Tok::KwBool: return "'bool'";
    case Tok::KwFlow: return "'Flow'";
    case Tok::KwFun: return "'fun'";
    case Tok::KwForward: return "'forward*'";
    case Tok::KwGet: return "'get*'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Assign: return "'='";
    case Tok::Bang: return "'!'";
    case Tok::Hash: return "'#'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::EqEq: return "'=='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Fail {
  ParseError error;
};

[[noreturn]] void fail(SourceLoc loc, std::string msg,
                       std::vector<std::string> expected = {}) {
  throw Fail{ParseError{loc.line, loc.column, std::move(msg),
                        std::move(expected)}};
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      SourceLoc loc{line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", 0, loc});
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
          c == '$') {
        out.push_back(ident(loc));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(number(loc));
      } else {
        out.push_back(symbol(loc));
      }
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blank() {
    for (;;) {
      while (pos_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[pos_])))
        advance();
      // `--` starts a comment running to end of line
      if (pos_ + 1 < src_.size() && src_[pos_] == '-' && src_[pos_ + 1] == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      return;
    }
  }

  Token ident(SourceLoc loc) {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_' || src_[pos_] == '$'))
      advance();
    std::string text(src_.substr(start, pos_ - start));
    // starred keywords: the * must be adjacent
    if ((text == "forward" || text == "get") && pos_ < src_.size() &&
        src_[pos_] == '*') {
      advance();
      return {text == "forward" ? Tok::KwForward : Tok::KwGet, text + "*", 0,
              loc};
    }
    if (text == "skip") return {Tok::KwSkip, text, 0, loc};
    if (text == "if") return {Tok::KwIf, text, 0, loc};
    if (text == "else") return {Tok::KwElse, text, 0, loc};
    if (text == "return") return {Tok::KwReturn, text, 0, loc};
    if (text == "true") return {Tok::KwTrue, text, 0, loc};
    if (text == "false") return {Tok::KwFalse, text, 0, loc};
    if (text == "int") return {Tok::KwInt, text, 0, loc};
    if (text == "bool") return {Tok::KwBool, text, 0, loc};
    if (text == "Flow") return {Tok::KwFlow, text, 0, loc};
    if (text == "fun") return {Tok::KwFun, text, 0, loc};
    return {Tok::Ident, std::move(text), 0, loc};
  }

  Token number(SourceLoc loc) {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_])))
      advance();
    std::string text(src_.substr(start, pos_ - start));
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(text.c_str(), &end, 10);
    if (errno == ERANGE) fail(loc, "integer literal out of range");
    return {Tok::IntLit, std::move(text), v, loc};
  }

  Token symbol(SourceLoc loc) {
    auto two = [&](char a, char b) {
      return src_[pos_] == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
    };
    if (two('=', '=')) { advance(); advance(); return {Tok::EqEq, "==", 0, loc}; }
    if (two('<', '=')) { advance(); advance(); return {Tok::Le, "<=", 0, loc}; }
    if (two('&', '&')) { advance(); advance(); return {Tok::AndAnd, "&&", 0, loc}; }
    if (two('|', '|')) { advance(); advance(); return {Tok::OrOr, "||", 0, loc}; }
    char c = src_[pos_];
    advance();
    switch (c) {
      case '{': return {Tok::LBrace, "{", 0, loc};
      case '}': return {Tok::RBrace, "}", 0, loc};
      case '(': return {Tok::LParen, "(", 0, loc};
      case ')': return {Tok::RParen, ")", 0, loc};
      case '[': return {Tok::LBracket, "[", 0, loc};
      case ']': return {Tok::RBracket, "]", 0, loc};
      case ';': return {Tok::Semi, ";", 0, loc};
      case ',': return {Tok::Comma, ",", 0, loc};
      case '=': return {Tok::Assign, "=", 0, loc};
      case '!': return {Tok::Bang, "!", 0, loc};
      case '#': return {Tok::Hash, "#", 0, loc};
      case '+': return {Tok::Plus, "+", 0, loc};
      case '-': return {Tok::Minus, "-", 0, loc};
      case '*': return {Tok::Star, "*", 0, loc};
      case '<': return {Tok::Lt, "<", 0, loc};
    }
    fail(loc, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::optional<Dialect> forced)
      : toks_(std::move(toks)), forced_(forced) {}

  Program run() {
    Program p;
    std::optional<Dialect> pragma = parse_pragma();
    if (forced_ && pragma && *forced_ != *pragma)
      fail(toks_.front().loc, "dialect pragma conflicts with forced dialect");
    dialect_ = forced_ ? forced_ : pragma;  // may stay open until forward* seen
    saw_forward_ = false;

    while (at(Tok::KwInt) || at(Tok::KwBool) || at(Tok::KwFlow)) {
      p.globals.push_back(parse_vardecl());
      expect(Tok::Semi);
    }
    while (at(Tok::KwFun)) p.functions.push_back(parse_fundef());
    expect(Tok::LBrace);
    while (at(Tok::KwInt) || at(Tok::KwBool) || at(Tok::KwFlow)) {
      p.main_locals.push_back(parse_vardecl());
      expect(Tok::Semi);
    }
    p.main_body = parse_stmtseq();
    expect(Tok::RBrace);
    expect(Tok::End);

    if (dialect_) {
      p.dialect = *dialect_;
    } else {
      p.dialect = saw_forward_ ? Dialect::DefPlusF : Dialect::Def;
    }
    return p;
  }

 private:
  const Token& cur() const { return toks_[idx_]; }
  bool at(Tok k) const { return cur().kind == k; }

  Token take() { return toks_[idx_++]; }

  Token expect(Tok k) {
    if (!at(k))
      fail(cur().loc, "unexpected " + describe(cur().kind), {describe(k)});
    return take();
  }

  std::optional<Dialect> parse_pragma() {
    if (!at(Tok::Hash)) return std::nullopt;
    SourceLoc loc = cur().loc;
    take();
    Token name = expect(Tok::Ident);
    if (name.text != "dialect") fail(loc, "unknown pragma '#" + name.text + "'");
    Token which = expect(Tok::Ident);
    if (which.text != "def")
      fail(which.loc, "unknown dialect '" + which.text + "'",
           {"'def'", "'def+f'"});
    if (at(Tok::Plus)) {
      take();
      Token f = expect(Tok::Ident);
      if (f.text != "f")
        fail(f.loc, "unknown dialect 'def+" + f.text + "'", {"'def+f'"});
      return Dialect::DefPlusF;
    }
    return Dialect::Def;
  }

  Type parse_type() {
    if (at(Tok::KwInt)) { take(); return Type::basic(Base::Int); }
    if (at(Tok::KwBool)) { take(); return Type::basic(Base::Bool); }
    if (at(Tok::KwFlow)) {
      take();
      expect(Tok::LBracket);
      Base b;
      if (at(Tok::KwInt)) { take(); b = Base::Int; }
      else if (at(Tok::KwBool)) { take(); b = Base::Bool; }
      else
        fail(cur().loc, "unexpected " + describe(cur().kind),
             {"'int'", "'bool'"});
      expect(Tok::RBracket);
      return Type::flow(b);
    }
    fail(cur().loc, "unexpected " + describe(cur().kind),
         {"'int'", "'bool'", "'Flow'"});
  }

  std::string parse_declared_name() {
    Token t = expect(Tok::Ident);
    if (is_reserved_word(t.text))
      fail(t.loc, "'" + t.text + "' is a reserved word");
    return t.text;
  }

  VarDecl parse_vardecl() {
    SourceLoc loc = cur().loc;
    Type ty = parse_type();
    return VarDecl{parse_declared_name(), ty, loc};
  }

  FunDef parse_fundef() {
    SourceLoc loc = expect(Tok::KwFun).loc;
    Type ret = parse_type();
    std::string name = parse_declared_name();
    expect(Tok::LParen);
    std::vector<VarDecl> params;
    if (!at(Tok::RParen)) {
      params.push_back(parse_vardecl());
      while (at(Tok::Comma)) {
        take();
        params.push_back(parse_vardecl());
      }
    }
    expect(Tok::RParen);
    expect(Tok::LBrace);
    std::vector<VarDecl> locals;
    while (at(Tok::KwInt) || at(Tok::KwBool) || at(Tok::KwFlow)) {
      locals.push_back(parse_vardecl());
      expect(Tok::Semi);
    }
    StmtPtr body = parse_stmtseq();
    expect(Tok::RBrace);
    return FunDef{ret, std::move(name), std::move(params), std::move(locals),
                  std::move(body), loc};
  }

  StmtPtr parse_stmtseq() {
    StmtPtr first = parse_stmt();
    if (at(Tok::Semi)) {
      SourceLoc loc = take().loc;
      StmtPtr rest = parse_stmtseq();
      return make_stmt(Seq{std::move(first), std::move(rest)}, loc);
    }
    return first;
  }

  StmtPtr parse_stmt() {
    SourceLoc loc = cur().loc;
    if (at(Tok::KwSkip)) {
      take();
      return make_stmt(Skip{}, loc);
    }
    if (at(Tok::KwReturn)) {
      take();
      return make_stmt(Return{parse_atom()}, loc);
    }
    if (at(Tok::KwForward)) {
      take();
      note_forward(loc);
      return make_stmt(ForwardStar{parse_atom()}, loc);
    }
    if (at(Tok::KwIf)) {
      take();
      Atom cond = parse_atom();
      expect(Tok::LBrace);
      StmtPtr thn = parse_stmtseq();
      expect(Tok::RBrace);
      expect(Tok::KwElse);
      expect(Tok::LBrace);
      StmtPtr els = parse_stmtseq();
      expect(Tok::RBrace);
      return make_stmt(If{cond, std::move(thn), std::move(els)}, loc);
    }
    if (at(Tok::Ident)) {
      std::string target = take().text;
      expect(Tok::Assign);
      return make_stmt(Assign{std::move(target), parse_rhs()}, loc);
    }
    fail(loc, "unexpected " + describe(cur().kind),
         {"'skip'", "'if'", "'return'", "'forward*'", "identifier"});
  }

  Rhs parse_rhs() {
    if (at(Tok::KwGet)) {
      take();
      return Rhs{GetStar{parse_atom()}};
    }
    if (at(Tok::Bang)) {
      take();
      Token fn = expect(Tok::Ident);
      return Rhs{AsyncCall{fn.text, parse_args(), fn.loc}};
    }
    if (at(Tok::Ident) && toks_[idx_ + 1].kind == Tok::LParen) {
      Token fn = take();
      return Rhs{SyncCall{fn.text, parse_args(), fn.loc}};
    }
    Atom lhs = parse_atom();
    std::optional<BinaryOp> op = peek_binop();
    if (!op) return Rhs{Expr{lhs}};
    take();
    Atom rhs = parse_atom();
    return Rhs{Expr{BinOp{std::move(lhs), *op, std::move(rhs)}}};
  }

  std::vector<Atom> parse_args() {
    expect(Tok::LParen);
    std::vector<Atom> args;
    if (!at(Tok::RParen)) {
      args.push_back(parse_atom());
      while (at(Tok::Comma)) {
        take();
        args.push_back(parse_atom());
      }
    }
    expect(Tok::RParen);
    return args;
  }

  std::optional<BinaryOp> peek_binop() const {
    switch (cur().kind) {
      case Tok::Plus: return BinaryOp::Add;
      case Tok::Minus: return BinaryOp::Sub;
      case Tok::Star: return BinaryOp::Mul;
      case Tok::EqEq: return BinaryOp::Eq;
      case Tok::Lt: return BinaryOp::Lt;
      case Tok::Le: return BinaryOp::Le;
      case Tok::AndAnd: return BinaryOp::And;
      case Tok::OrOr: return BinaryOp::Or;
      default: return std::nullopt;
    }
  }

  Atom parse_atom() {
    SourceLoc loc = cur().loc;
    if (at(Tok::Ident)) return var_atom(take().text, loc);
    if (at(Tok::IntLit)) return int_atom(take().value, loc);
    if (at(Tok::KwTrue)) { take(); return bool_atom(true, loc); }
    if (at(Tok::KwFalse)) { take(); return bool_atom(false, loc); }
    if (at(Tok::Minus)) {
      take();
      Token n = expect(Tok::IntLit);
      return int_atom(-n.value, loc);
    }
    fail(loc, "unexpected " + describe(cur().kind),
         {"identifier", "integer", "'true'", "'false'"});
  }

  void note_forward(SourceLoc loc) {
    if (dialect_ && *dialect_ == Dialect::Def)
      fail(loc, "forward* is not available in dialect def");
    saw_forward_ = true;
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
  std::optional<Dialect> forced_;
  std::optional<Dialect> dialect_;
  bool saw_forward_ = false;
};

}  // namespace

ParseResult parse_program(std::string_view source,
                          std::optional<Dialect> forced) {
  ParseResult result;
  try {
    Lexer lexer(source);
    Parser parser(lexer.run(), forced);
    result.program = parser.run();
  } catch (const Fail& f) {
    result.errors.push_back(f.error);
  }
  return result;
}

}  // namespace defcal
