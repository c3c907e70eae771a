#include <deque>

#include "gl/vm.hpp"
#include "vm/arith.hpp"

namespace gl {

namespace {

struct Env;
using EnvPtr = std::shared_ptr<const Env>;

struct Env {
  const std::string* name;
  Value value;
  EnvPtr next;
};

EnvPtr bind(EnvPtr env, const std::string& name, Value v) {
  return std::make_shared<const Env>(Env{&name, std::move(v), std::move(env)});
}

const Value* lookup(const Env* env, const std::string& name) {
  for (; env; env = env->next.get())
    if (*env->name == name) return &env->value;
  return nullptr;
}

enum class TaskKind {
  Eval, Let, If, BinOp, Make, Call, Builtin, Throw, TryPop, Arm, Guard, RecvFetch,
  RecvAccept, Jump, MatchThrow, Ret
};

struct Task {
  TaskKind kind;
  const Expr* e = nullptr;
  EnvPtr env;
  bool tail = false;
  std::size_t arm = 0;
};

struct Handler {
  std::size_t tasks;
  std::size_t values;
  const Expr* node;
  EnvPtr env;
  bool tail;
};

struct MapState {
  std::vector<Value> items;
  std::size_t next = 0;
  std::vector<Value> results;
  Value fn;
};

struct Frame {
  int fn = -1;  // -1 marks a native host_map continuation
  int line = 1;
  std::vector<Task> tasks;
  std::vector<Value> values;
  std::vector<Handler> handlers;
  std::unique_ptr<MapState> map;
};

struct AstState final : EngineState {
  std::vector<Frame> frames;
  // Allocation units of already-decided instructions that still have to be
  // retired one reduction at a time.
  std::deque<std::int64_t> pending;
};

struct FnShape {
  std::shared_ptr<const std::string> name;
  const std::vector<std::string>* params;
  const std::vector<std::string>* captures;
  const Expr* body;
};

// Walks a pattern the way its compiled test sequence would, counting the
// instructions retired. Bindings extend env.
bool match_pattern(const Pattern& p, const Value& v, EnvPtr& env, std::int64_t& n) {
  using K = Pattern::Kind;
  ++n;
  switch (p.kind) {
    case K::Wild: return true;
    case K::Var:
      env = bind(std::move(env), p.text, v);
      return true;
    case K::Int:
      if (!v.is(Tag::Int) || v.as_int() != p.ival) return false;
      ++n;
      return true;
    case K::Bool:
      if (!v.is(Tag::Bool) || v.as_bool() != p.bval) return false;
      ++n;
      return true;
    case K::Str:
      if (!v.is(Tag::Str) || v.as_str() != p.text) return false;
      ++n;
      return true;
    case K::Unit:
      if (!v.is(Tag::Unit)) return false;
      ++n;
      return true;
    case K::Nil:
      if (!v.is_nil()) return false;
      ++n;
      return true;
    case K::Cons:
      if (!v.is_cons()) return false;
      n += 4;
      if (!match_pattern(p.kids[0], v.head(), env, n)) return false;
      ++n;
      return match_pattern(p.kids[1], v.tail(), env, n);
    case K::Tuple: {
      if (!v.is(Tag::Tuple) || v.items().size() != p.kids.size()) return false;
      n += static_cast<std::int64_t>(p.kids.size()) + 1;
      for (std::size_t i = 0; i < p.kids.size(); ++i) {
        ++n;
        if (!match_pattern(p.kids[i], v.items()[i], env, n)) return false;
      }
      return true;
    }
  }
  return false;
}

class AstEngine final : public Engine {
 public:
  AstEngine(World& w, std::shared_ptr<const Program> prog) : w_(w), prog_(std::move(prog)) {
    for (const auto& d : prog_->defs)
      shapes_.push_back({std::make_shared<const std::string>(d.name), &d.params, &kNone, d.body.get()});
    for (const auto& l : prog_->lambdas)
      shapes_.push_back({std::make_shared<const std::string>(l.name), &l.node->params,
                         &l.node->captures, l.node->kids[0].get()});
  }

  void start(Process& p, int fn, std::vector<Value> captures) override {
    auto st = std::make_unique<AstState>();
    st->frames.push_back(new_frame(fn, {}, captures));
    p.engine = std::move(st);
  }

  std::shared_ptr<const std::string> function_name(int fn) const override {
    return shapes_[fn].name;
  }
  int function_arity(int fn) const override {
    return static_cast<int>(shapes_[fn].params->size());
  }

  Value stacktrace(const Process& p) const override {
    const auto& frames = static_cast<const AstState&>(*p.engine).frames;
    std::vector<Value> out;
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
      if (it->fn < 0) continue;
      out.push_back(Value::tuple({Value::str(*shapes_[it->fn].name), Value::integer(it->line)}));
    }
    return Value::list(out);
  }

  SliceEnd run_slice(Process& p) override;

 private:
  Frame new_frame(int fn, std::span<const Value> args, std::span<const Value> caps) const {
    const FnShape& s = shapes_[fn];
    Frame fr;
    fr.fn = fn;
    fr.line = s.body->line;
    EnvPtr env;
    for (std::size_t i = 0; i < args.size(); ++i) env = bind(std::move(env), (*s.params)[i], args[i]);
    for (std::size_t i = 0; i < caps.size() && i < s.captures->size(); ++i)
      env = bind(std::move(env), (*s.captures)[i], caps[i]);
    fr.tasks.push_back({TaskKind::Ret, nullptr, nullptr, false, 0});
    fr.tasks.push_back({TaskKind::Eval, s.body, std::move(env), true, 0});
    return fr;
  }

  bool raise(Process& p, Value exc);
  bool deliver(Process& p, Value v);
  // Returns false when the process crashed or exited; sets end accordingly.
  bool step(Process& p, AstState& st, Task t, SliceEnd& end);
  void next_arm(AstState& st, const Task& t);
  void arm_success(AstState& st, const Task& t, EnvPtr env);

  static inline const std::vector<std::string> kNone{};

  World& w_;
  std::shared_ptr<const Program> prog_;
  std::vector<FnShape> shapes_;
};

bool AstEngine::raise(Process& p, Value exc) {
  auto& st = static_cast<AstState&>(*p.engine);
  auto& frames = st.frames;
  Value trace = stacktrace(p);
  while (!frames.empty()) {
    Frame& f = frames.back();
    if (f.fn >= 0 && !f.handlers.empty()) {
      Handler h = f.handlers.back();
      f.handlers.pop_back();
      f.tasks.resize(h.tasks);
      f.values.resize(h.values);
      st.pending.push_back(0);
      st.pending.push_back(0);
      EnvPtr env = bind(h.env, h.node->name, std::move(exc));
      env = bind(std::move(env), h.node->name2, std::move(trace));
      f.tasks.push_back({TaskKind::Eval, h.node->kids[1].get(), std::move(env), h.tail, 0});
      return true;
    }
    frames.pop_back();
  }
  w_.crash(p, std::move(exc), std::move(trace));
  return false;
}

bool AstEngine::deliver(Process& p, Value v) {
  auto& frames = static_cast<AstState&>(*p.engine).frames;
  for (;;) {
    if (frames.empty()) {
      p.result = std::move(v);
      return false;
    }
    Frame& f = frames.back();
    if (f.fn >= 0) {
      f.values.push_back(std::move(v));
      return true;
    }
    MapState& ms = *f.map;
    ms.results.push_back(std::move(v));
    if (ms.next < ms.items.size()) {
      const auto& c = ms.fn.as_closure();
      Value arg = ms.items[ms.next++];
      frames.push_back(new_frame(c.fn, std::span<const Value>(&arg, 1), c.captures));
      return true;
    }
    v = Value::list(ms.results);
    w_.allocate(p, 2 * static_cast<std::int64_t>(ms.results.size()), "host_map");
    frames.pop_back();
  }
}

void AstEngine::next_arm(AstState& st, const Task& t) {
  Frame& f = st.frames.back();
  if (t.arm + 1 < t.e->arms.size()) {
    f.tasks.push_back({TaskKind::Arm, t.e, t.env, t.tail, t.arm + 1});
  } else if (t.e->kind == ExprKind::Receive) {
    st.pending.push_back(0);
    st.pending.push_back(0);
    f.values.pop_back();
    f.tasks.push_back({TaskKind::RecvFetch, t.e, t.env, t.tail, 0});
  } else {
    st.pending.push_back(static_cast<std::int64_t>(std::string_view("match_error").size()));
    f.tasks.push_back({TaskKind::MatchThrow, t.e, nullptr, false, 0});
  }
}

void AstEngine::arm_success(AstState& st, const Task& t, EnvPtr env) {
  Frame& f = st.frames.back();
  st.pending.push_back(0);
  f.values.pop_back();
  f.tasks.push_back({TaskKind::Jump, nullptr, nullptr, false, 0});
  f.tasks.push_back({TaskKind::Eval, t.e->arms[t.arm].body.get(), std::move(env), t.tail, 0});
  if (t.e->kind == ExprKind::Receive) f.tasks.push_back({TaskKind::RecvAccept, nullptr, nullptr, false, 0});
}

bool AstEngine::step(Process& p, AstState& st, Task t, SliceEnd& end) {
  auto& frames = st.frames;
  Frame& f = frames.back();
  auto& vals = f.values;
  auto pop = [&vals] {
    Value v = std::move(vals.back());
    vals.pop_back();
    return v;
  };
  auto fail = [&](Value exc) {
    if (raise(p, std::move(exc))) return true;
    end = SliceEnd::Crashed;
    return false;
  };
  auto push_task = [&f](TaskKind k, const Expr* e, EnvPtr env = nullptr, bool tail = false) {
    f.tasks.push_back({k, e, std::move(env), tail, 0});
  };
  auto charge = [&] { w_.charge(p, 1); };

  const Expr* e = t.e;
  switch (t.kind) {
    case TaskKind::Eval:
      switch (e->kind) {
        case ExprKind::IntLit:
          charge();
          vals.push_back(Value::integer(e->ival));
          return true;
        case ExprKind::BoolLit:
          charge();
          vals.push_back(Value::boolean(e->bval));
          return true;
        case ExprKind::UnitLit:
          charge();
          vals.push_back(Value::unit());
          return true;
        case ExprKind::StrLit:
          charge();
          w_.allocate(p, static_cast<std::int64_t>(e->name.size()), "string");
          vals.push_back(Value::str(e->name));
          return true;
        case ExprKind::Var: {
          charge();
          if (const Value* v = lookup(t.env.get(), e->name)) {
            vals.push_back(*v);
            return true;
          }
          int d = prog_->find_def(e->name);
          if (d >= 0) {
            vals.push_back(w_.make_closure(p, d, {}));
            return true;
          }
          f.line = e->line;
          return fail(fault("unbound_variable"));
        }
        case ExprKind::Let:
          push_task(TaskKind::Let, e, t.env, t.tail);
          push_task(TaskKind::Eval, e->kids[0].get(), t.env);
          return true;
        case ExprKind::If:
          push_task(TaskKind::If, e, t.env, t.tail);
          push_task(TaskKind::Eval, e->kids[0].get(), t.env);
          return true;
        case ExprKind::Match:
          push_task(TaskKind::Arm, e, t.env, t.tail);
          push_task(TaskKind::Eval, e->kids[0].get(), t.env);
          return true;
        case ExprKind::Receive:
          charge();
          p.cursor = 0;
          push_task(TaskKind::RecvFetch, e, t.env, t.tail);
          return true;
        case ExprKind::TryCatch:
          charge();
          f.handlers.push_back({f.tasks.size(), vals.size(), e, t.env, t.tail});
          push_task(TaskKind::TryPop, e);
          push_task(TaskKind::Eval, e->kids[0].get(), t.env);
          return true;
        case ExprKind::Throw:
          push_task(TaskKind::Throw, e);
          push_task(TaskKind::Eval, e->kids[0].get(), t.env);
          return true;
        case ExprKind::Lambda: {
          charge();
          std::vector<Value> caps;
          for (const auto& c : e->captures)
            if (const Value* v = lookup(t.env.get(), c)) caps.push_back(*v);
          vals.push_back(w_.make_closure(p, e->fn_index, std::move(caps)));
          return true;
        }
        case ExprKind::Call:
        case ExprKind::BuiltinCall:
        case ExprKind::BinOp:
        case ExprKind::TupleLit:
        case ExprKind::ListLit: {
          TaskKind k = e->kind == ExprKind::Call          ? TaskKind::Call
                       : e->kind == ExprKind::BuiltinCall ? TaskKind::Builtin
                       : e->kind == ExprKind::BinOp       ? TaskKind::BinOp
                                                          : TaskKind::Make;
          push_task(k, e, nullptr, t.tail);
          for (auto it = e->kids.rbegin(); it != e->kids.rend(); ++it)
            push_task(TaskKind::Eval, it->get(), t.env);
          return true;
        }
      }
      return true;

    case TaskKind::Let: {
      charge();
      Value v = pop();
      push_task(TaskKind::Eval, e->kids[1].get(), bind(t.env, e->name, std::move(v)), t.tail);
      return true;
    }

    case TaskKind::If: {
      charge();
      f.line = e->line;
      Value c = pop();
      if (!c.is(Tag::Bool)) return fail(fault("type_error"));
      if (c.as_bool()) {
        push_task(TaskKind::Jump, nullptr);
        push_task(TaskKind::Eval, e->kids[1].get(), t.env, t.tail);
      } else {
        push_task(TaskKind::Eval, e->kids[2].get(), t.env, t.tail);
      }
      return true;
    }

    case TaskKind::BinOp: {
      charge();
      f.line = e->line;
      Value r = pop();
      Value l = pop();
      switch (e->op) {
        case BinOpKind::Eq:
        case BinOpKind::Ne: {
          bool eq = value_equal(l, r);
          vals.push_back(Value::boolean(e->op == BinOpKind::Eq ? eq : !eq));
          return true;
        }
        case BinOpKind::Cons:
          if (!r.is(Tag::List)) return fail(fault("type_error"));
          w_.allocate(p, 2, "cons");
          vals.push_back(Value::cons(std::move(l), std::move(r)));
          return true;
        case BinOpKind::Concat: {
          if (!l.is(Tag::Str) || !r.is(Tag::Str)) return fail(fault("type_error"));
          std::string s = l.as_str() + r.as_str();
          w_.allocate(p, static_cast<std::int64_t>(s.size()), "concat");
          vals.push_back(Value::str(std::move(s)));
          return true;
        }
        default: {
          if (!l.is(Tag::Int) || !r.is(Tag::Int)) return fail(fault("type_error"));
          Op op = e->op == BinOpKind::Add   ? Op::Add
                  : e->op == BinOpKind::Sub ? Op::Sub
                  : e->op == BinOpKind::Mul ? Op::Mul
                  : e->op == BinOpKind::Div ? Op::Div
                  : e->op == BinOpKind::Lt  ? Op::Lt
                                            : Op::Le;
          auto res = arith(op, l.as_int(), r.as_int());
          if (!res) return fail(fault("arith_error"));
          vals.push_back(*res);
          return true;
        }
      }
    }

    case TaskKind::Make: {
      charge();
      auto n = e->kids.size();
      std::span<const Value> xs(vals.data() + vals.size() - n, n);
      Value v;
      if (e->kind == ExprKind::TupleLit) {
        w_.allocate(p, static_cast<std::int64_t>(n) + 1, "tuple");
        v = Value::tuple(std::vector<Value>(xs.begin(), xs.end()));
      } else {
        w_.allocate(p, 2 * static_cast<std::int64_t>(n), "list");
        v = Value::list(xs);
      }
      vals.resize(vals.size() - n);
      vals.push_back(std::move(v));
      return true;
    }

    case TaskKind::Call: {
      charge();
      f.line = e->line;
      std::size_t n = e->kids.size() - 1;
      const Value& callee = vals[vals.size() - n - 1];
      if (!callee.is(Tag::Closure)) return fail(fault("type_error"));
      const auto& c = callee.as_closure();
      if (c.arity != static_cast<int>(n)) return fail(fault("bad_arity"));
      Frame nf = new_frame(c.fn, std::span<const Value>(vals).subspan(vals.size() - n), c.captures);
      vals.resize(vals.size() - n - 1);
      if (t.tail) frames.pop_back();
      frames.push_back(std::move(nf));
      return true;
    }

    case TaskKind::Builtin: {
      auto b = static_cast<Builtin>(e->builtin);
      std::size_t n = e->kids.size();
      std::vector<Value> args(std::make_move_iterator(vals.end() - static_cast<std::ptrdiff_t>(n)),
                              std::make_move_iterator(vals.end()));
      vals.resize(vals.size() - n);
      charge();
      w_.charge(p, w_.builtin_surcharge(b, args));
      f.line = e->line;
      BuiltinResult r = w_.call_builtin(p, b, args);
      switch (r.kind) {
        case BuiltinResult::Kind::Return:
          frames.back().values.push_back(std::move(r.value));
          return true;
        case BuiltinResult::Kind::Throw:
          return fail(std::move(r.value));
        case BuiltinResult::Kind::HostMap: {
          if (r.items.empty()) {
            frames.back().values.push_back(Value::nil());
            return true;
          }
          Frame nat;
          nat.map = std::make_unique<MapState>();
          nat.map->items = std::move(r.items);
          nat.map->fn = std::move(r.fn);
          nat.map->next = 1;
          const auto& c = nat.map->fn.as_closure();
          Value arg = nat.map->items[0];
          Frame cb = new_frame(c.fn, std::span<const Value>(&arg, 1), c.captures);
          frames.push_back(std::move(nat));
          frames.push_back(std::move(cb));
          return true;
        }
      }
      return true;
    }

    case TaskKind::Throw:
      charge();
      f.line = e->line;
      return fail(pop());

    case TaskKind::TryPop:
      charge();
      f.handlers.pop_back();
      st.pending.push_back(0);
      return true;

    case TaskKind::Arm: {
      const Arm& arm = e->arms[t.arm];
      std::int64_t n = 1;
      EnvPtr env = t.env;
      bool ok = match_pattern(arm.pat, vals.back(), env, n);
      if (!ok) ++n;
      for (std::int64_t i = 0; i < n; ++i) st.pending.push_back(0);
      if (!ok) {
        next_arm(st, t);
      } else if (arm.guard) {
        f.tasks.push_back({TaskKind::Guard, e, env, t.tail, t.arm});
        push_task(TaskKind::Eval, arm.guard.get(), env);
      } else {
        arm_success(st, t, std::move(env));
      }
      return true;
    }

    case TaskKind::Guard: {
      charge();
      f.line = e->arms[t.arm].guard->line;
      Value c = pop();
      if (!c.is(Tag::Bool)) return fail(fault("type_error"));
      if (c.as_bool())
        arm_success(st, t, t.env);
      else
        next_arm(st, t);
      return true;
    }

    case TaskKind::RecvFetch:
      charge();
      vals.push_back(p.mailbox[p.cursor++]);
      f.tasks.push_back({TaskKind::Arm, e, t.env, t.tail, 0});
      return true;

    case TaskKind::RecvAccept: {
      charge();
      BuiltinResult r = w_.call_builtin(p, Builtin::RecvAccept, {});
      if (r.kind == BuiltinResult::Kind::Throw) return fail(std::move(r.value));
      return true;
    }

    case TaskKind::Jump:
      charge();
      return true;

    case TaskKind::MatchThrow:
      charge();
      f.line = e->line;
      return fail(fault("match_error"));

    case TaskKind::Ret: {
      charge();
      Value v = pop();
      frames.pop_back();
      if (!deliver(p, std::move(v))) {
        end = SliceEnd::Exited;
        return false;
      }
      return true;
    }
  }
  return true;
}

SliceEnd AstEngine::run_slice(Process& p) {
  auto& st = static_cast<AstState&>(*p.engine);
  for (;;) {
    while (!st.pending.empty()) {
      switch (w_.gate(p)) {
        case Gate::Yield: return SliceEnd::Yield;
        case Gate::FuelOut: return SliceEnd::FuelOut;
        case Gate::Go: break;
      }
      w_.count_task();
      w_.charge(p, 1);
      w_.allocate(p, st.pending.front(), "string");
      st.pending.pop_front();
    }
    switch (w_.gate(p)) {
      case Gate::Yield: return SliceEnd::Yield;
      case Gate::FuelOut: return SliceEnd::FuelOut;
      case Gate::Go: break;
    }
    Frame& f = st.frames.back();
    const Task& top = f.tasks.back();
    if (p.cursor >= p.mailbox.size() &&
        (top.kind == TaskKind::RecvFetch ||
         (top.kind == TaskKind::Builtin && top.e->builtin == static_cast<int>(Builtin::RecvFetch))))
      return SliceEnd::Blocked;
    Task t = std::move(f.tasks.back());
    f.tasks.pop_back();
    w_.count_task();
    SliceEnd end = SliceEnd::Yield;
    if (!step(p, st, std::move(t), end)) return end;
  }
}

}  // namespace

std::unique_ptr<Engine> make_ast_engine(World& w, std::shared_ptr<const Program> p) {
  return std::make_unique<AstEngine>(w, std::move(p));
}

}  // namespace gl
