#include <limits>
#include <optional>

#include "gl/frontend.hpp"

namespace gl {

namespace {

std::string describe(const Token& t) {
  switch (t.kind) {
    case TokKind::Int: return "integer " + std::to_string(t.ival);
    case TokKind::Str: return "string literal";
    case TokKind::Ident: return "identifier '" + t.text + "'";
    case TokKind::Keyword: return "keyword '" + t.text + "'";
    case TokKind::LParen: return "'('";
    case TokKind::RParen: return "')'";
    case TokKind::LBracket: return "'['";
    case TokKind::RBracket: return "']'";
    case TokKind::LBrace: return "'{'";
    case TokKind::RBrace: return "'}'";
    case TokKind::Comma: return "','";
    case TokKind::Assign: return "'='";
    case TokKind::Arrow: return "'->'";
    case TokKind::Plus: return "'+'";
    case TokKind::Minus: return "'-'";
    case TokKind::Star: return "'*'";
    case TokKind::Slash: return "'/'";
    case TokKind::Lt: return "'<'";
    case TokKind::Le: return "'<='";
    case TokKind::EqEq: return "'=='";
    case TokKind::Ne: return "'!='";
    case TokKind::Concat: return "'++'";
    case TokKind::ColonColon: return "'::'";
    case TokKind::End: return "end of input";
  }
  return "token";
}

class Parser {
 public:
  explicit Parser(const std::vector<Token>& toks) : toks_(toks) {}

  Program program() {
    Program p;
    while (peek().kind != TokKind::End) p.defs.push_back(def());
    return p;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    std::size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at(TokKind k) const { return peek().kind == k; }
  bool at_kw(std::string_view kw) const { return peek().is_keyword(kw); }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(peek().line, "expected " + expected + ", found " + describe(peek()));
  }
  const Token& expect(TokKind k, const std::string& what) {
    if (!at(k)) fail(what);
    return next();
  }
  void expect_kw(std::string_view kw) {
    if (!at_kw(kw)) fail("'" + std::string(kw) + "'");
    next();
  }
  std::string ident(const std::string& what) { return expect(TokKind::Ident, what).text; }

  FnDef def() {
    FnDef d;
    d.line = peek().line;
    expect_kw("fn");
    d.name = ident("function name");
    d.params = params();
    expect(TokKind::Assign, "'='");
    d.body = expr();
    return d;
  }

  std::vector<std::string> params() {
    std::vector<std::string> ps;
    expect(TokKind::LParen, "'('");
    if (!at(TokKind::RParen)) {
      ps.push_back(ident("parameter name"));
      while (at(TokKind::Comma)) {
        next();
        ps.push_back(ident("parameter name"));
      }
    }
    expect(TokKind::RParen, "')'");
    return ps;
  }

  static ExprPtr make(ExprKind k, int line) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->line = line;
    return e;
  }

  ExprPtr expr() {
    const Token& t = peek();
    int line = t.line;
    if (t.is_keyword("let")) {
      next();
      auto e = make(ExprKind::Let, line);
      e->name = ident("variable name");
      expect(TokKind::Assign, "'='");
      e->kids.push_back(expr());
      expect_kw("in");
      e->kids.push_back(expr());
      return e;
    }
    if (t.is_keyword("if")) {
      next();
      auto e = make(ExprKind::If, line);
      e->kids.push_back(expr());
      expect_kw("then");
      e->kids.push_back(expr());
      expect_kw("else");
      e->kids.push_back(expr());
      return e;
    }
    if (t.is_keyword("match")) {
      next();
      auto e = make(ExprKind::Match, line);
      e->kids.push_back(expr());
      e->arms = arms();
      return e;
    }
    if (t.is_keyword("receive")) {
      next();
      auto e = make(ExprKind::Receive, line);
      e->arms = arms();
      return e;
    }
    if (t.is_keyword("try")) {
      next();
      auto e = make(ExprKind::TryCatch, line);
      e->kids.push_back(expr());
      expect_kw("catch");
      expect(TokKind::LParen, "'('");
      e->name = ident("exception variable");
      expect(TokKind::Comma, "','");
      e->name2 = ident("trace variable");
      expect(TokKind::RParen, "')'");
      expect(TokKind::Arrow, "'->'");
      e->kids.push_back(expr());
      return e;
    }
    if (t.is_keyword("throw")) {
      next();
      auto e = make(ExprKind::Throw, line);
      e->kids.push_back(expr());
      return e;
    }
    if (t.is_keyword("fn")) {
      next();
      auto e = make(ExprKind::Lambda, line);
      e->params = params();
      expect(TokKind::Arrow, "'->'");
      e->kids.push_back(expr());
      return e;
    }
    return comparison();
  }

  static ExprPtr binop(BinOpKind op, ExprPtr l, ExprPtr r, int line) {
    auto e = make(ExprKind::BinOp, line);
    e->op = op;
    e->kids.push_back(std::move(l));
    e->kids.push_back(std::move(r));
    return e;
  }

  ExprPtr comparison() {
    auto l = cons_level();
    auto cmp = [&]() -> std::optional<BinOpKind> {
      switch (peek().kind) {
        case TokKind::Lt: return BinOpKind::Lt;
        case TokKind::Le: return BinOpKind::Le;
        case TokKind::EqEq: return BinOpKind::Eq;
        case TokKind::Ne: return BinOpKind::Ne;
        default: return std::nullopt;
      }
    };
    if (auto op = cmp()) {
      int line = next().line;
      auto r = cons_level();
      if (cmp()) throw ParseError(peek().line, "comparison operators are non-associative");
      return binop(*op, std::move(l), std::move(r), line);
    }
    return l;
  }

  ExprPtr cons_level() {
    auto l = additive();
    if (at(TokKind::ColonColon) || at(TokKind::Concat)) {
      BinOpKind op = at(TokKind::ColonColon) ? BinOpKind::Cons : BinOpKind::Concat;
      int line = next().line;
      auto r = cons_level();
      return binop(op, std::move(l), std::move(r), line);
    }
    return l;
  }

  ExprPtr additive() {
    auto l = multiplicative();
    while (at(TokKind::Plus) || at(TokKind::Minus)) {
      BinOpKind op = at(TokKind::Plus) ? BinOpKind::Add : BinOpKind::Sub;
      int line = next().line;
      l = binop(op, std::move(l), multiplicative(), line);
    }
    return l;
  }

  ExprPtr multiplicative() {
    auto l = postfix();
    while (at(TokKind::Star) || at(TokKind::Slash)) {
      BinOpKind op = at(TokKind::Star) ? BinOpKind::Mul : BinOpKind::Div;
      int line = next().line;
      l = binop(op, std::move(l), postfix(), line);
    }
    return l;
  }

  std::vector<ExprPtr> call_args() {
    std::vector<ExprPtr> args;
    expect(TokKind::LParen, "'('");
    if (!at(TokKind::RParen)) {
      args.push_back(expr());
      while (at(TokKind::Comma)) {
        next();
        args.push_back(expr());
      }
    }
    expect(TokKind::RParen, "')'");
    return args;
  }

  ExprPtr postfix() {
    auto e = atom();
    while (at(TokKind::LParen)) {
      int line = e->line;
      if (e->kind == ExprKind::Var && find_builtin(e->name) >= 0) {
        auto b = make(ExprKind::BuiltinCall, line);
        b->name = e->name;
        b->kids = call_args();
        e = std::move(b);
        continue;
      }
      auto c = make(ExprKind::Call, line);
      c->kids.push_back(std::move(e));
      for (auto& a : call_args()) c->kids.push_back(std::move(a));
      e = std::move(c);
    }
    return e;
  }

  std::int64_t int_literal(bool negative) {
    const Token& t = expect(TokKind::Int, "integer");
    constexpr std::uint64_t max = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
    if (!negative && t.ival > max) throw ParseError(t.line, "integer literal out of range");
    if (negative) {
      if (t.ival == max + 1) return std::numeric_limits<std::int64_t>::min();
      return -static_cast<std::int64_t>(t.ival);
    }
    return static_cast<std::int64_t>(t.ival);
  }

  ExprPtr atom() {
    const Token& t = peek();
    int line = t.line;
    switch (t.kind) {
      case TokKind::Int: {
        auto e = make(ExprKind::IntLit, line);
        e->ival = int_literal(false);
        return e;
      }
      case TokKind::Minus: {
        if (peek(1).kind != TokKind::Int) fail("expression");
        next();
        auto e = make(ExprKind::IntLit, line);
        e->ival = int_literal(true);
        return e;
      }
      case TokKind::Str: {
        auto e = make(ExprKind::StrLit, line);
        e->name = next().text;
        return e;
      }
      case TokKind::Ident: {
        auto e = make(ExprKind::Var, line);
        e->name = next().text;
        return e;
      }
      case TokKind::Keyword:
        if (t.text == "true" || t.text == "false") {
          auto e = make(ExprKind::BoolLit, line);
          e->bval = next().text == "true";
          return e;
        }
        if (t.text == "let" || t.text == "if" || t.text == "match" || t.text == "receive" ||
            t.text == "try" || t.text == "throw" || t.text == "fn")
          return expr();
        fail("expression");
      case TokKind::LParen: {
        next();
        if (at(TokKind::RParen)) {
          next();
          return make(ExprKind::UnitLit, line);
        }
        if (at(TokKind::Comma)) {
          next();
          expect(TokKind::RParen, "')'");
          return make(ExprKind::TupleLit, line);
        }
        auto first = expr();
        if (at(TokKind::RParen)) {
          next();
          return first;
        }
        auto tup = make(ExprKind::TupleLit, line);
        tup->kids.push_back(std::move(first));
        while (at(TokKind::Comma)) {
          next();
          if (at(TokKind::RParen)) break;
          tup->kids.push_back(expr());
        }
        expect(TokKind::RParen, "')'");
        return tup;
      }
      case TokKind::LBracket: {
        next();
        auto lst = make(ExprKind::ListLit, line);
        while (!at(TokKind::RBracket)) {
          lst->kids.push_back(expr());
          if (!at(TokKind::Comma)) break;
          next();
        }
        expect(TokKind::RBracket, "']'");
        return lst;
      }
      default:
        fail("expression");
    }
  }

  std::vector<Arm> arms() {
    std::vector<Arm> out;
    expect(TokKind::LBrace, "'{'");
    while (!at(TokKind::RBrace)) {
      Arm a;
      a.line = peek().line;
      a.pat = pattern();
      if (at_kw("if")) {
        next();
        a.guard = comparison();
      }
      expect(TokKind::Arrow, "'->'");
      a.body = expr();
      out.push_back(std::move(a));
      if (!at(TokKind::Comma)) break;
      next();
    }
    expect(TokKind::RBrace, "'}'");
    return out;
  }

  Pattern pattern() {
    Pattern head = pattern_atom();
    if (at(TokKind::ColonColon)) {
      int line = next().line;
      Pattern c;
      c.kind = Pattern::Kind::Cons;
      c.line = line;
      c.kids.push_back(std::move(head));
      c.kids.push_back(pattern());
      return c;
    }
    return head;
  }

  Pattern pattern_atom() {
    const Token& t = peek();
    Pattern p;
    p.line = t.line;
    switch (t.kind) {
      case TokKind::Ident:
        p.text = next().text;
        p.kind = p.text == "_" ? Pattern::Kind::Wild : Pattern::Kind::Var;
        if (p.kind == Pattern::Kind::Wild) p.text.clear();
        return p;
      case TokKind::Int:
        p.kind = Pattern::Kind::Int;
        p.ival = int_literal(false);
        return p;
      case TokKind::Minus:
        next();
        p.kind = Pattern::Kind::Int;
        p.ival = int_literal(true);
        return p;
      case TokKind::Str:
        p.kind = Pattern::Kind::Str;
        p.text = next().text;
        return p;
      case TokKind::Keyword:
        if (t.text == "true" || t.text == "false") {
          p.kind = Pattern::Kind::Bool;
          p.bval = next().text == "true";
          return p;
        }
        fail("pattern");
      case TokKind::LParen: {
        next();
        if (at(TokKind::RParen)) {
          next();
          p.kind = Pattern::Kind::Unit;
          return p;
        }
        if (at(TokKind::Comma)) {
          next();
          expect(TokKind::RParen, "')'");
          p.kind = Pattern::Kind::Tuple;
          return p;
        }
        Pattern first = pattern();
        if (at(TokKind::RParen)) {
          next();
          return first;
        }
        p.kind = Pattern::Kind::Tuple;
        p.kids.push_back(std::move(first));
        while (at(TokKind::Comma)) {
          next();
          if (at(TokKind::RParen)) break;
          p.kids.push_back(pattern());
        }
        expect(TokKind::RParen, "')'");
        return p;
      }
      case TokKind::LBracket: {
        next();
        std::vector<Pattern> elems;
        while (!at(TokKind::RBracket)) {
          elems.push_back(pattern());
          if (!at(TokKind::Comma)) break;
          next();
        }
        int end_line = peek().line;
        expect(TokKind::RBracket, "']'");
        Pattern acc;
        acc.kind = Pattern::Kind::Nil;
        acc.line = elems.empty() ? p.line : end_line;
        for (auto it = elems.rbegin(); it != elems.rend(); ++it) {
          Pattern c;
          c.kind = Pattern::Kind::Cons;
          c.line = it->line;
          c.kids.push_back(std::move(*it));
          c.kids.push_back(std::move(acc));
          acc = std::move(c);
        }
        if (elems.empty()) acc.line = p.line;
        return acc;
      }
      default:
        fail("pattern");
    }
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Program parse(const std::vector<Token>& tokens) {
  if (tokens.empty()) return {};
  return Parser(tokens).program();
}

Program parse_source(std::string_view source) {
  Program p = parse(tokenize(source));
  annotate(p);
  return p;
}

}  // namespace gl
