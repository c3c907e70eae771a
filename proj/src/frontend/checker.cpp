#include <algorithm>

#include "gl/frontend.hpp"

namespace gl {

namespace {

using Scope = std::vector<std::string>;

bool in_scope(const Scope& s, const std::string& name) {
  return std::find(s.rbegin(), s.rend(), name) != s.rend();
}

void pattern_vars(const Pattern& p, std::vector<std::string>& out) {
  if (p.kind == Pattern::Kind::Var) out.push_back(p.text);
  for (const auto& k : p.kids) pattern_vars(k, out);
}

// Appends free locals of `e` (relative to `bound`) that resolve in `outer`.
void collect_free(const Expr& e, Scope& bound, const Scope& outer, std::vector<std::string>& out) {
  auto note = [&](const std::string& name) {
    if (!in_scope(bound, name) && in_scope(outer, name) &&
        std::find(out.begin(), out.end(), name) == out.end())
      out.push_back(name);
  };
  auto arms = [&](const std::vector<Arm>& as) {
    for (const auto& a : as) {
      std::size_t mark = bound.size();
      pattern_vars(a.pat, bound);
      if (a.guard) collect_free(*a.guard, bound, outer, out);
      collect_free(*a.body, bound, outer, out);
      bound.resize(mark);
    }
  };
  switch (e.kind) {
    case ExprKind::Var:
      note(e.name);
      return;
    case ExprKind::Let: {
      collect_free(*e.kids[0], bound, outer, out);
      bound.push_back(e.name);
      collect_free(*e.kids[1], bound, outer, out);
      bound.pop_back();
      return;
    }
    case ExprKind::Match:
      collect_free(*e.kids[0], bound, outer, out);
      arms(e.arms);
      return;
    case ExprKind::Receive:
      arms(e.arms);
      return;
    case ExprKind::TryCatch:
      collect_free(*e.kids[0], bound, outer, out);
      bound.push_back(e.name);
      bound.push_back(e.name2);
      collect_free(*e.kids[1], bound, outer, out);
      bound.resize(bound.size() - 2);
      return;
    case ExprKind::Lambda: {
      std::size_t mark = bound.size();
      for (const auto& p : e.params) bound.push_back(p);
      collect_free(*e.kids[0], bound, outer, out);
      bound.resize(mark);
      return;
    }
    default:
      for (const auto& k : e.kids) collect_free(*k, bound, outer, out);
  }
}

class Annotator {
 public:
  explicit Annotator(Program& p) : prog_(p) {}

  void run() {
    prog_.lambdas.clear();
    for (std::size_t i = 0; i < prog_.defs.size(); ++i) {
      def_ = static_cast<int>(i);
      counter_ = 0;
      Scope scope(prog_.defs[i].params.begin(), prog_.defs[i].params.end());
      walk(*prog_.defs[i].body, scope);
    }
    prog_.annotated = true;
  }

 private:
  void arms(std::vector<Arm>& as, Scope& scope) {
    for (auto& a : as) {
      std::size_t mark = scope.size();
      pattern_vars(a.pat, scope);
      if (a.guard) walk(*a.guard, scope);
      walk(*a.body, scope);
      scope.resize(mark);
    }
  }

  void walk(Expr& e, Scope& scope) {
    switch (e.kind) {
      case ExprKind::BuiltinCall:
        e.builtin = find_builtin(e.name);
        for (auto& k : e.kids) walk(*k, scope);
        return;
      case ExprKind::Let:
        walk(*e.kids[0], scope);
        scope.push_back(e.name);
        walk(*e.kids[1], scope);
        scope.pop_back();
        return;
      case ExprKind::Match:
        walk(*e.kids[0], scope);
        arms(e.arms, scope);
        return;
      case ExprKind::Receive:
        arms(e.arms, scope);
        return;
      case ExprKind::TryCatch:
        walk(*e.kids[0], scope);
        scope.push_back(e.name);
        scope.push_back(e.name2);
        walk(*e.kids[1], scope);
        scope.resize(scope.size() - 2);
        return;
      case ExprKind::Lambda: {
        e.fn_index = static_cast<int>(prog_.defs.size() + prog_.lambdas.size());
        prog_.lambdas.push_back(
            {&e, prog_.defs[def_].name + ".lambda" + std::to_string(counter_++), def_});
        e.captures.clear();
        Scope bound(e.params.begin(), e.params.end());
        collect_free(*e.kids[0], bound, scope, e.captures);
        Scope inner(e.params.begin(), e.params.end());
        inner.insert(inner.end(), e.captures.begin(), e.captures.end());
        walk(*e.kids[0], inner);
        return;
      }
      default:
        for (auto& k : e.kids) walk(*k, scope);
    }
  }

  Program& prog_;
  int def_ = 0;
  int counter_ = 0;
};

class Checker {
 public:
  explicit Checker(const Program& p) : prog_(p) {}

  std::vector<CheckError> run() {
    bool has_main = false;
    for (std::size_t i = 0; i < prog_.defs.size(); ++i) {
      const auto& d = prog_.defs[i];
      if (d.name == "main" && d.params.empty()) has_main = true;
      if (find_builtin(d.name) >= 0)
        error(d.line, "function `" + d.name + "` shadows a builtin");
      for (std::size_t j = 0; j < i; ++j)
        if (prog_.defs[j].name == d.name) error(d.line, "duplicate function `" + d.name + "`");
      check_params(d.params, d.line);
      Scope scope(d.params.begin(), d.params.end());
      walk(*d.body, scope);
    }
    if (!has_main) error(1, "missing function main/0");
    return std::move(errors_);
  }

 private:
  void error(int line, std::string msg) { errors_.push_back({line, std::move(msg)}); }

  void check_params(const std::vector<std::string>& ps, int line) {
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (ps[i] == ps[j]) error(line, "duplicate parameter `" + ps[i] + "`");
  }

  void check_pattern(const Pattern& p) {
    std::vector<std::string> vars;
    pattern_vars(p, vars);
    for (std::size_t i = 0; i < vars.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (vars[i] == vars[j]) {
          error(p.line, "duplicate variable `" + vars[i] + "` in pattern");
          break;
        }
  }

  void arms(const std::vector<Arm>& as, Scope& scope) {
    for (const auto& a : as) {
      check_pattern(a.pat);
      std::size_t mark = scope.size();
      pattern_vars(a.pat, scope);
      if (a.guard) walk(*a.guard, scope);
      walk(*a.body, scope);
      scope.resize(mark);
    }
  }

  void walk(const Expr& e, Scope& scope) {
    switch (e.kind) {
      case ExprKind::Var:
        if (!in_scope(scope, e.name) && prog_.find_def(e.name) < 0)
          error(e.line, "unbound variable `" + e.name + "`");
        return;
      case ExprKind::Call: {
        const Expr& callee = *e.kids[0];
        if (callee.kind == ExprKind::Var && !in_scope(scope, callee.name)) {
          int d = prog_.find_def(callee.name);
          int argc = static_cast<int>(e.kids.size()) - 1;
          if (d < 0) {
            error(e.line, "unknown function `" + callee.name + "`");
          } else if (static_cast<int>(prog_.defs[d].params.size()) != argc) {
            error(e.line, "function `" + callee.name + "` expects " +
                              std::to_string(prog_.defs[d].params.size()) + " arguments, got " +
                              std::to_string(argc));
          }
        } else {
          walk(callee, scope);
        }
        for (std::size_t i = 1; i < e.kids.size(); ++i) walk(*e.kids[i], scope);
        return;
      }
      case ExprKind::BuiltinCall: {
        int b = find_builtin(e.name);
        if (b < 0) {
          error(e.line, "unknown builtin `" + e.name + "`");
        } else if (kBuiltins[b].arity != static_cast<int>(e.kids.size())) {
          error(e.line, "builtin `" + e.name + "` expects " +
                            std::to_string(kBuiltins[b].arity) + " arguments, got " +
                            std::to_string(e.kids.size()));
        }
        for (const auto& k : e.kids) walk(*k, scope);
        return;
      }
      case ExprKind::Let:
        walk(*e.kids[0], scope);
        scope.push_back(e.name);
        walk(*e.kids[1], scope);
        scope.pop_back();
        return;
      case ExprKind::Match:
        walk(*e.kids[0], scope);
        arms(e.arms, scope);
        return;
      case ExprKind::Receive:
        arms(e.arms, scope);
        return;
      case ExprKind::TryCatch:
        walk(*e.kids[0], scope);
        scope.push_back(e.name);
        scope.push_back(e.name2);
        walk(*e.kids[1], scope);
        scope.resize(scope.size() - 2);
        return;
      case ExprKind::Lambda: {
        check_params(e.params, e.line);
        std::size_t mark = scope.size();
        for (const auto& p : e.params) scope.push_back(p);
        walk(*e.kids[0], scope);
        scope.resize(mark);
        return;
      }
      default:
        for (const auto& k : e.kids) walk(*k, scope);
    }
  }

  const Program& prog_;
  std::vector<CheckError> errors_;
};

}  // namespace

void annotate(Program& program) { Annotator(program).run(); }

std::vector<CheckError> check(const Program& program) { return Checker(program).run(); }

std::string CheckError::to_string() const {
  return "CheckError at line " + std::to_string(line) + ": " + message;
}

}  // namespace gl
