#include <map>

#include "gl/frontend.hpp"

namespace gl {

namespace {

class ModuleBuilder;

class FnCompiler {
 public:
  FnCompiler(ModuleBuilder& mb, const Program& prog, Function& out)
      : mb_(mb), prog_(prog), fn_(out) {}

  void compile_body(const std::vector<std::string>& params,
                    const std::vector<std::string>& captures, const Expr& body, int line) {
    for (const auto& p : params) bind(p);
    for (const auto& c : captures) bind(c);
    expr(body, true);
    emit(Op::Ret, line);
    fn_.n_slots = next_slot_;
  }

 private:
  int bind(const std::string& name) {
    int slot = next_slot_++;
    scope_.emplace_back(name, slot);
    return slot;
  }
  int temp() { return next_slot_++; }

  int lookup(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == name) return it->second;
    return -1;
  }

  int here() const { return static_cast<int>(fn_.code.size()); }

  int emit(Op op, int line, std::int64_t a = 0, std::int64_t b = 0) {
    fn_.code.push_back(Instr{op, a, b, {}});
    fn_.lines.push_back(line);
    return here() - 1;
  }

  void patch(int at, int target) {
    Instr& in = fn_.code[at];
    switch (in.op) {
      case Op::Jump:
      case Op::JumpIfFalse:
      case Op::TryPush:
      case Op::TestUnit:
      case Op::TestNil:
      case Op::TestCons:
        in.a = target;
        break;
      default:
        in.b = target;
    }
  }

  void expr(const Expr& e, bool tail);
  void arms(const std::vector<Arm>& as, int line, bool receive, bool tail);
  void pattern(const Pattern& p, std::vector<int>& fails);

  ModuleBuilder& mb_;
  const Program& prog_;
  Function& fn_;
  std::vector<std::pair<std::string, int>> scope_;
  int next_slot_ = 0;
};

class ModuleBuilder {
 public:
  explicit ModuleBuilder(const Program& p) : prog_(p) {}

  int constant(const std::string& s) {
    auto it = pool_.find(s);
    if (it != pool_.end()) return it->second;
    int k = static_cast<int>(mod_.constants.size());
    mod_.constants.push_back(s);
    pool_.emplace(s, k);
    return k;
  }

  Module build() {
    std::size_t n_defs = prog_.defs.size();
    mod_.functions.resize(n_defs + prog_.lambdas.size());
    for (std::size_t i = 0; i < n_defs; ++i) {
      const auto& d = prog_.defs[i];
      auto& f = mod_.functions[i];
      f.name = std::make_shared<const std::string>(d.name);
      f.arity = static_cast<int>(d.params.size());
      FnCompiler(*this, prog_, f).compile_body(d.params, {}, *d.body, d.line);
      if (d.name == "main" && d.params.empty()) mod_.entry = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < prog_.lambdas.size(); ++i) {
      const auto& info = prog_.lambdas[i];
      auto& f = mod_.functions[n_defs + i];
      f.name = std::make_shared<const std::string>(info.name);
      f.arity = static_cast<int>(info.node->params.size());
      FnCompiler(*this, prog_, f)
          .compile_body(info.node->params, info.node->captures, *info.node->kids[0],
                        info.node->line);
    }
    return std::move(mod_);
  }

 private:
  const Program& prog_;
  Module mod_;
  std::map<std::string, int> pool_;
};

Op binop_code(BinOpKind k) {
  switch (k) {
    case BinOpKind::Add: return Op::Add;
    case BinOpKind::Sub: return Op::Sub;
    case BinOpKind::Mul: return Op::Mul;
    case BinOpKind::Div: return Op::Div;
    case BinOpKind::Lt: return Op::Lt;
    case BinOpKind::Le: return Op::Le;
    case BinOpKind::Eq: return Op::Eq;
    case BinOpKind::Ne: return Op::Ne;
    case BinOpKind::Concat: return Op::Concat;
    case BinOpKind::Cons: return Op::Cons;
  }
  return Op::Add;
}

void FnCompiler::expr(const Expr& e, bool tail) {
  const int line = e.line;
  switch (e.kind) {
    case ExprKind::IntLit:
      emit(Op::PushInt, line, e.ival);
      return;
    case ExprKind::BoolLit:
      emit(Op::PushBool, line, e.bval ? 1 : 0);
      return;
    case ExprKind::StrLit:
      emit(Op::PushStr, line, mb_.constant(e.name));
      return;
    case ExprKind::UnitLit:
      emit(Op::PushUnit, line);
      return;
    case ExprKind::Var: {
      int slot = lookup(e.name);
      if (slot >= 0) {
        emit(Op::Load, line, slot);
      } else {
        int d = prog_.find_def(e.name);
        if (d < 0) throw HostError("compile: unbound variable " + e.name);
        emit(Op::MakeClosure, line, d);
      }
      return;
    }
    case ExprKind::Let: {
      expr(*e.kids[0], false);
      std::size_t mark = scope_.size();
      emit(Op::Store, line, bind(e.name));
      expr(*e.kids[1], tail);
      scope_.resize(mark);
      return;
    }
    case ExprKind::If: {
      expr(*e.kids[0], false);
      int jf = emit(Op::JumpIfFalse, line);
      expr(*e.kids[1], tail);
      int jend = emit(Op::Jump, line);
      patch(jf, here());
      expr(*e.kids[2], tail);
      patch(jend, here());
      return;
    }
    case ExprKind::Match:
      expr(*e.kids[0], false);
      arms(e.arms, line, false, tail);
      return;
    case ExprKind::Receive:
      arms(e.arms, line, true, tail);
      return;
    case ExprKind::TryCatch: {
      int push = emit(Op::TryPush, line);
      expr(*e.kids[0], false);
      emit(Op::TryPop, line);
      int jend = emit(Op::Jump, line);
      patch(push, here());
      std::size_t mark = scope_.size();
      int ev = bind(e.name);
      int tv = bind(e.name2);
      emit(Op::Store, line, tv);
      emit(Op::Store, line, ev);
      expr(*e.kids[1], tail);
      scope_.resize(mark);
      patch(jend, here());
      return;
    }
    case ExprKind::Throw:
      expr(*e.kids[0], false);
      emit(Op::Throw, line);
      return;
    case ExprKind::Lambda: {
      int at = emit(Op::MakeClosure, line, e.fn_index);
      for (const auto& c : e.captures) {
        int slot = lookup(c);
        if (slot < 0) throw HostError("compile: unresolved capture " + c);
        fn_.code[at].slots.push_back(slot);
      }
      return;
    }
    case ExprKind::Call: {
      for (const auto& k : e.kids) expr(*k, false);
      emit(tail ? Op::TailCall : Op::Call, line, static_cast<std::int64_t>(e.kids.size()) - 1);
      return;
    }
    case ExprKind::BuiltinCall: {
      for (const auto& k : e.kids) expr(*k, false);
      emit(Op::CallBuiltin, line, e.builtin, static_cast<std::int64_t>(e.kids.size()));
      return;
    }
    case ExprKind::BinOp:
      expr(*e.kids[0], false);
      expr(*e.kids[1], false);
      emit(binop_code(e.op), line);
      return;
    case ExprKind::TupleLit:
      for (const auto& k : e.kids) expr(*k, false);
      emit(Op::MakeTuple, line, static_cast<std::int64_t>(e.kids.size()));
      return;
    case ExprKind::ListLit:
      for (const auto& k : e.kids) expr(*k, false);
      emit(Op::MakeList, line, static_cast<std::int64_t>(e.kids.size()));
      return;
  }
}

// Subject (or fetched message) is on top of the stack on entry to each arm.
void FnCompiler::arms(const std::vector<Arm>& as, int line, bool receive, bool tail) {
  int loop = -1;
  if (receive) {
    emit(Op::RecvReset, line);
    loop = emit(Op::RecvFetch, line);
  }
  std::vector<int> to_end;
  std::vector<int> to_next;  // guard failures jump to the next arm's start
  for (const auto& arm : as) {
    for (int j : to_next) patch(j, here());
    to_next.clear();
    std::size_t mark = scope_.size();
    std::vector<int> fails;
    emit(Op::Dup, arm.line);
    pattern(arm.pat, fails);
    if (arm.guard) {
      expr(*arm.guard, false);
      to_next.push_back(emit(Op::JumpIfFalse, arm.guard->line));
    }
    emit(Op::Pop, arm.line);
    if (receive) emit(Op::RecvAccept, arm.line);
    expr(*arm.body, tail);
    to_end.push_back(emit(Op::Jump, arm.line));
    for (int f : fails) patch(f, here());
    emit(Op::Pop, arm.line);
    scope_.resize(mark);
  }
  for (int j : to_next) patch(j, here());
  if (receive) {
    emit(Op::Pop, line);
    emit(Op::Jump, line, loop);
  } else {
    emit(Op::PushStr, line, mb_.constant("match_error"));
    emit(Op::Throw, line);
  }
  for (int j : to_end) patch(j, here());
}

// Value to match is on top. Success consumes it; failure jumps with it still on top.
void FnCompiler::pattern(const Pattern& p, std::vector<int>& fails) {
  const int line = p.line;
  switch (p.kind) {
    case Pattern::Kind::Wild:
      emit(Op::Pop, line);
      return;
    case Pattern::Kind::Var:
      emit(Op::Store, line, bind(p.text));
      return;
    case Pattern::Kind::Int:
      fails.push_back(emit(Op::TestInt, line, p.ival));
      emit(Op::Pop, line);
      return;
    case Pattern::Kind::Bool:
      fails.push_back(emit(Op::TestBool, line, p.bval ? 1 : 0));
      emit(Op::Pop, line);
      return;
    case Pattern::Kind::Str:
      fails.push_back(emit(Op::TestStr, line, mb_.constant(p.text)));
      emit(Op::Pop, line);
      return;
    case Pattern::Kind::Unit:
      fails.push_back(emit(Op::TestUnit, line));
      emit(Op::Pop, line);
      return;
    case Pattern::Kind::Nil:
      fails.push_back(emit(Op::TestNil, line));
      emit(Op::Pop, line);
      return;
    case Pattern::Kind::Cons: {
      fails.push_back(emit(Op::TestCons, line));
      int tail_slot = temp();
      int head_slot = temp();
      emit(Op::Store, line, tail_slot);
      emit(Op::Store, line, head_slot);
      emit(Op::Pop, line);
      emit(Op::Load, line, head_slot);
      pattern(p.kids[0], fails);
      emit(Op::Load, line, tail_slot);
      pattern(p.kids[1], fails);
      return;
    }
    case Pattern::Kind::Tuple: {
      auto n = static_cast<int>(p.kids.size());
      fails.push_back(emit(Op::TestTuple, line, n));
      std::vector<int> slots(n);
      for (int i = n - 1; i >= 0; --i) {
        slots[i] = temp();
        emit(Op::Store, line, slots[i]);
      }
      emit(Op::Pop, line);
      for (int i = 0; i < n; ++i) {
        emit(Op::Load, line, slots[i]);
        pattern(p.kids[i], fails);
      }
      return;
    }
  }
}

}  // namespace

Module compile(const Program& program) {
  if (!program.annotated) throw HostError("compile: program is not annotated");
  return ModuleBuilder(program).build();
}

}  // namespace gl
