#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gl/ast.hpp"
#include "gl/module.hpp"
#include "gl/value.hpp"

namespace gl {

/// A front-end diagnostic that carries a source line.
class SourceError : public std::runtime_error {
 public:
  SourceError(std::string kind, int line, const std::string& msg)
      : std::runtime_error(kind + " at line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class LexError : public SourceError {
 public:
  LexError(int line, const std::string& msg) : SourceError("LexError", line, msg) {}
};

class ParseError : public SourceError {
 public:
  ParseError(int line, const std::string& msg) : SourceError("ParseError", line, msg) {}
};

/// Raised for malformed modules; never for guest-level faults.
class HostError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TokKind {
  Int, Str, Ident, Keyword,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace, Comma,
  Assign, Arrow, Plus, Minus, Star, Slash, Lt, Le, EqEq, Ne, Concat, ColonColon,
  End,
};

struct Token {
  TokKind kind = TokKind::End;
  std::string text;       // identifier, keyword, string contents
  std::uint64_t ival = 0;  // magnitude of an integer literal
  int line = 1;

  bool is_keyword(std::string_view kw) const { return kind == TokKind::Keyword && text == kw; }
};

std::vector<Token> tokenize(std::string_view source);
Program parse(const std::vector<Token>& tokens);
Program parse_source(std::string_view source);

/// Numbers lifted lambdas, computes capture lists and resolves builtin ids.
/// Tolerates programs that fail check(); unresolvable names are left alone.
void annotate(Program& program);

struct CheckError {
  int line = 1;
  std::string message;
  std::string to_string() const;
};

std::vector<CheckError> check(const Program& program);

/// Requires an annotated program that passed check().
Module compile(const Program& program);

std::string disassemble(const Module& m);
Value reify(const Module& m);

/// Pretty-prints a program back to parseable source.
std::string format_program(const Program& program);

}  // namespace gl
