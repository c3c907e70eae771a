#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace gl {

struct Pattern {
  enum class Kind { Wild, Var, Int, Bool, Str, Unit, Nil, Cons, Tuple };
  Kind kind = Kind::Wild;
  int line = 1;
  std::string text;  // Var name or Str literal
  std::int64_t ival = 0;
  bool bval = false;
  std::vector<Pattern> kids;  // Cons: head, tail. Tuple: elements.
};

enum class ExprKind {
  IntLit, BoolLit, StrLit, UnitLit, Var, Let, If, Match, TryCatch, Throw,
  Receive, Lambda, Call, BuiltinCall, BinOp, TupleLit, ListLit
};

enum class BinOpKind { Add, Sub, Mul, Div, Lt, Le, Eq, Ne, Concat, Cons };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Arm {
  Pattern pat;
  ExprPtr guard;  // may be null
  ExprPtr body;
  int line = 1;
};

// Child layout by kind:
//   Let: kids = {bound, body}, name = bound variable
//   If: kids = {cond, then, else}
//   Match: kids = {subject}, arms
//   Receive: arms
//   TryCatch: kids = {body, handler}, name = exception var, name2 = trace var
//   Throw: kids = {value}
//   Lambda: kids = {body}, params
//   Call: kids = {callee, args...}
//   BuiltinCall: kids = args, name = builtin name
//   BinOp: kids = {lhs, rhs}
//   TupleLit / ListLit: kids = elements
struct Expr {
  ExprKind kind = ExprKind::UnitLit;
  int line = 1;
  std::int64_t ival = 0;
  bool bval = false;
  std::string name;
  std::string name2;
  BinOpKind op = BinOpKind::Add;
  std::vector<ExprPtr> kids;
  std::vector<std::string> params;
  std::vector<Arm> arms;

  // Filled by annotate().
  int builtin = -1;
  int fn_index = -1;                  // Lambda: index of the lifted function
  std::vector<std::string> captures;  // Lambda: captured locals, first-occurrence order
};

struct FnDef {
  std::string name;
  std::vector<std::string> params;
  ExprPtr body;
  int line = 1;
};

struct LambdaInfo {
  const Expr* node = nullptr;
  std::string name;  // DEF.lambdaK
  int def_index = 0;
};

struct Program {
  std::vector<FnDef> defs;
  // Lifted lambdas in global pre-order; function index = defs.size() + position.
  std::vector<LambdaInfo> lambdas;
  bool annotated = false;

  int find_def(const std::string& name) const {
    for (std::size_t i = 0; i < defs.size(); ++i)
      if (defs[i].name == name) return static_cast<int>(i);
    return -1;
  }
};

bool ast_equal(const Program& a, const Program& b);

}  // namespace gl
