#include <array>
#include <cctype>
#include <limits>

#include "gl/frontend.hpp"

namespace gl {

namespace {

constexpr std::array<std::string_view, 13> kKeywords = {
    "fn", "let", "in", "if", "then", "else", "match", "try", "catch", "throw", "receive",
    "true", "false"};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  auto push = [&](TokKind k, std::string text = {}) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.line = line;
    out.push_back(std::move(t));
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t v = 0;
      constexpr std::uint64_t limit = std::uint64_t{1} << 63;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
        std::uint64_t d = static_cast<std::uint64_t>(src[i] - '0');
        if (v > (limit - d) / 10) throw LexError(line, "integer literal out of range");
        v = v * 10 + d;
        ++i;
      }
      if (i < src.size() && is_ident_char(src[i]))
        throw LexError(line, "malformed number");
      push(TokKind::Int);
      out.back().ival = v;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t start = i;
      while (i < src.size() && is_ident_char(src[i])) ++i;
      std::string word(src.substr(start, i - start));
      bool kw = false;
      for (auto k : kKeywords) kw = kw || k == word;
      push(kw ? TokKind::Keyword : TokKind::Ident, std::move(word));
      continue;
    }
    if (c == '"') {
      int start_line = line;
      std::string s;
      ++i;
      for (;;) {
        if (i >= src.size()) throw LexError(start_line, "unterminated string");
        char d = src[i++];
        if (d == '"') break;
        if (d == '\n') ++line;
        if (d == '\\') {
          if (i >= src.size()) throw LexError(start_line, "unterminated string");
          char e = src[i++];
          switch (e) {
            case 'n': s += '\n'; break;
            case 't': s += '\t'; break;
            case '"': s += '"'; break;
            case '\\': s += '\\'; break;
            default: throw LexError(line, std::string("unknown escape \\") + e);
          }
          continue;
        }
        s += d;
      }
      Token t;
      t.kind = TokKind::Str;
      t.text = std::move(s);
      t.line = start_line;
      out.push_back(std::move(t));
      continue;
    }
    auto two = src.substr(i, 2);
    if (two == "->") { push(TokKind::Arrow); i += 2; continue; }
    if (two == "<=") { push(TokKind::Le); i += 2; continue; }
    if (two == "==") { push(TokKind::EqEq); i += 2; continue; }
    if (two == "!=") { push(TokKind::Ne); i += 2; continue; }
    if (two == "++") { push(TokKind::Concat); i += 2; continue; }
    if (two == "::") { push(TokKind::ColonColon); i += 2; continue; }
    TokKind k;
    switch (c) {
      case '(': k = TokKind::LParen; break;
      case ')': k = TokKind::RParen; break;
      case '[': k = TokKind::LBracket; break;
      case ']': k = TokKind::RBracket; break;
      case '{': k = TokKind::LBrace; break;
      case '}': k = TokKind::RBrace; break;
      case ',': k = TokKind::Comma; break;
      case '=': k = TokKind::Assign; break;
      case '+': k = TokKind::Plus; break;
      case '-': k = TokKind::Minus; break;
      case '*': k = TokKind::Star; break;
      case '/': k = TokKind::Slash; break;
      case '<': k = TokKind::Lt; break;
      default:
        throw LexError(line, std::string("illegal character '") + c + "'");
    }
    push(k);
    ++i;
  }
  push(TokKind::End);
  return out;
}

}  // namespace gl
