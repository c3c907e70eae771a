#include <sstream>

#include "gl/frontend.hpp"

namespace gl {

namespace {

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
  return out;
}

std::string pattern_src(const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Wild: return "_";
    case Pattern::Kind::Var: return p.text;
    case Pattern::Kind::Int: return std::to_string(p.ival);
    case Pattern::Kind::Bool: return p.bval ? "true" : "false";
    case Pattern::Kind::Str: return quote_string(p.text);
    case Pattern::Kind::Unit: return "()";
    case Pattern::Kind::Nil: return "[]";
    case Pattern::Kind::Cons:
      return "(" + pattern_src(p.kids[0]) + " :: " + pattern_src(p.kids[1]) + ")";
    case Pattern::Kind::Tuple: {
      std::vector<std::string> xs;
      for (const auto& k : p.kids) xs.push_back(pattern_src(k));
      return "(" + join(xs) + (xs.size() <= 1 ? ",)" : ")");
    }
  }
  return "_";
}

std::string_view op_src(BinOpKind k) {
  switch (k) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::Div: return "/";
    case BinOpKind::Lt: return "<";
    case BinOpKind::Le: return "<=";
    case BinOpKind::Eq: return "==";
    case BinOpKind::Ne: return "!=";
    case BinOpKind::Concat: return "++";
    case BinOpKind::Cons: return "::";
  }
  return "?";
}

// Every compound expression is parenthesized, so precedence never matters.
std::string expr_src(const Expr& e) {
  auto arms_src = [](const std::vector<Arm>& as) {
    std::string out = "{ ";
    for (std::size_t i = 0; i < as.size(); ++i) {
      if (i) out += ", ";
      out += pattern_src(as[i].pat);
      if (as[i].guard) out += " if " + expr_src(*as[i].guard);
      out += " -> " + expr_src(*as[i].body);
    }
    return out + " }";
  };
  auto list = [](const std::vector<ExprPtr>& ks, std::size_t from) {
    std::vector<std::string> xs;
    for (std::size_t i = from; i < ks.size(); ++i) xs.push_back(expr_src(*ks[i]));
    return xs;
  };
  switch (e.kind) {
    case ExprKind::IntLit: {
      std::string s = std::to_string(e.ival);
      return e.ival < 0 ? "(" + s + ")" : s;
    }
    case ExprKind::BoolLit: return e.bval ? "true" : "false";
    case ExprKind::StrLit: return quote_string(e.name);
    case ExprKind::UnitLit: return "()";
    case ExprKind::Var: return e.name;
    case ExprKind::Let:
      return "(let " + e.name + " = " + expr_src(*e.kids[0]) + " in " + expr_src(*e.kids[1]) + ")";
    case ExprKind::If:
      return "(if " + expr_src(*e.kids[0]) + " then " + expr_src(*e.kids[1]) + " else " +
             expr_src(*e.kids[2]) + ")";
    case ExprKind::Match: return "(match " + expr_src(*e.kids[0]) + " " + arms_src(e.arms) + ")";
    case ExprKind::Receive: return "(receive " + arms_src(e.arms) + ")";
    case ExprKind::TryCatch:
      return "(try " + expr_src(*e.kids[0]) + " catch (" + e.name + ", " + e.name2 + ") -> " +
             expr_src(*e.kids[1]) + ")";
    case ExprKind::Throw: return "(throw " + expr_src(*e.kids[0]) + ")";
    case ExprKind::Lambda: return "(fn (" + join(e.params) + ") -> " + expr_src(*e.kids[0]) + ")";
    case ExprKind::Call: return expr_src(*e.kids[0]) + "(" + join(list(e.kids, 1)) + ")";
    case ExprKind::BuiltinCall: return e.name + "(" + join(list(e.kids, 0)) + ")";
    case ExprKind::BinOp:
      return "(" + expr_src(*e.kids[0]) + " " + std::string(op_src(e.op)) + " " +
             expr_src(*e.kids[1]) + ")";
    case ExprKind::TupleLit: {
      auto xs = list(e.kids, 0);
      return "(" + join(xs) + (xs.size() <= 1 ? ",)" : ")");
    }
    case ExprKind::ListLit: return "[" + join(list(e.kids, 0)) + "]";
  }
  return "()";
}

bool pattern_eq(const Pattern& a, const Pattern& b) {
  if (a.kind != b.kind || a.text != b.text || a.ival != b.ival || a.bval != b.bval ||
      a.kids.size() != b.kids.size())
    return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!pattern_eq(a.kids[i], b.kids[i])) return false;
  return true;
}

bool expr_eq(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.ival != b.ival || a.bval != b.bval || a.name != b.name ||
      a.name2 != b.name2 || a.params != b.params || a.kids.size() != b.kids.size() ||
      a.arms.size() != b.arms.size())
    return false;
  if (a.kind == ExprKind::BinOp && a.op != b.op) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!expr_eq(*a.kids[i], *b.kids[i])) return false;
  for (std::size_t i = 0; i < a.arms.size(); ++i) {
    const Arm& x = a.arms[i];
    const Arm& y = b.arms[i];
    if (!pattern_eq(x.pat, y.pat) || !expr_eq(*x.body, *y.body)) return false;
    if (static_cast<bool>(x.guard) != static_cast<bool>(y.guard)) return false;
    if (x.guard && !expr_eq(*x.guard, *y.guard)) return false;
  }
  return true;
}

}  // namespace

std::string format_program(const Program& program) {
  std::ostringstream out;
  for (const auto& d : program.defs)
    out << "fn " << d.name << "(" << join(d.params) << ") = " << expr_src(*d.body) << "\n";
  return out.str();
}

bool ast_equal(const Program& a, const Program& b) {
  if (a.defs.size() != b.defs.size()) return false;
  for (std::size_t i = 0; i < a.defs.size(); ++i) {
    const auto& x = a.defs[i];
    const auto& y = b.defs[i];
    if (x.name != y.name || x.params != y.params || !expr_eq(*x.body, *y.body)) return false;
  }
  return true;
}

}  // namespace gl
