#include <limits>

#include "gl/vm.hpp"
#include "vm/arith.hpp"

namespace gl {

namespace {

struct Handler {
  std::int64_t target;
  std::size_t depth;
};

struct MapState {
  std::vector<Value> items;
  std::size_t next = 0;
  std::vector<Value> results;
  Value fn;
};

struct Frame {
  int fn = -1;  // -1 marks a native host_map continuation
  std::int64_t ip = 0;
  std::vector<Value> locals;
  std::vector<Value> stack;
  std::vector<Handler> handlers;
  std::unique_ptr<MapState> map;
};

struct BcState final : EngineState {
  std::vector<Frame> frames;
};

class BytecodeEngine final : public Engine {
 public:
  BytecodeEngine(World& w, std::shared_ptr<const Module> m) : w_(w), m_(std::move(m)) {
    validate_module(*m_);
  }

  void start(Process& p, int fn, std::vector<Value> captures) override {
    auto st = std::make_unique<BcState>();
    st->frames.push_back(new_frame(fn, {}, captures));
    p.engine = std::move(st);
  }

  std::shared_ptr<const std::string> function_name(int fn) const override {
    return m_->functions[fn].name;
  }
  int function_arity(int fn) const override { return m_->functions[fn].arity; }

  Value stacktrace(const Process& p) const override {
    const auto& frames = static_cast<const BcState&>(*p.engine).frames;
    std::vector<Value> out;
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
      if (it->fn < 0) continue;
      const auto& f = m_->functions[it->fn];
      out.push_back(Value::tuple({Value::str(*f.name), Value::integer(f.lines[it->ip])}));
    }
    return Value::list(out);
  }

  SliceEnd run_slice(Process& p) override;

 private:
  Frame new_frame(int fn, std::span<const Value> args, std::span<const Value> caps) const {
    const Function& f = m_->functions[fn];
    Frame fr;
    fr.fn = fn;
    fr.locals.resize(static_cast<std::size_t>(f.n_slots));
    std::size_t i = 0;
    for (const auto& a : args) fr.locals[i++] = a;
    for (const auto& c : caps) fr.locals[i++] = c;
    return fr;
  }

  // Returns false when the process crashed.
  bool raise(Process& p, Value exc);
  // Delivers a callee's return value to the frame below. Returns false on exit.
  bool deliver(Process& p, Value v);

  World& w_;
  std::shared_ptr<const Module> m_;
};

bool BytecodeEngine::raise(Process& p, Value exc) {
  auto& frames = static_cast<BcState&>(*p.engine).frames;
  Value trace = stacktrace(p);
  while (!frames.empty()) {
    Frame& f = frames.back();
    if (f.fn >= 0 && !f.handlers.empty()) {
      Handler h = f.handlers.back();
      f.handlers.pop_back();
      f.stack.resize(h.depth);
      f.stack.push_back(std::move(exc));
      f.stack.push_back(std::move(trace));
      f.ip = h.target;
      return true;
    }
    frames.pop_back();
  }
  w_.crash(p, std::move(exc), std::move(trace));
  return false;
}

bool BytecodeEngine::deliver(Process& p, Value v) {
  auto& frames = static_cast<BcState&>(*p.engine).frames;
  for (;;) {
    if (frames.empty()) {
      p.result = std::move(v);
      return false;
    }
    Frame& f = frames.back();
    if (f.fn >= 0) {
      f.stack.push_back(std::move(v));
      ++f.ip;
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

SliceEnd BytecodeEngine::run_slice(Process& p) {
  auto& frames = static_cast<BcState&>(*p.engine).frames;
  const auto& fns = m_->functions;
  for (;;) {
    switch (w_.gate(p)) {
      case Gate::Yield: return SliceEnd::Yield;
      case Gate::FuelOut: return SliceEnd::FuelOut;
      case Gate::Go: break;
    }
    Frame& f = frames.back();
    const Function& fn = fns[f.fn];
    const Instr& in = fn.code[f.ip];
    auto& st = f.stack;

    if (in.op == Op::RecvFetch ||
        (in.op == Op::CallBuiltin && w_.builtin_blocks(p, static_cast<Builtin>(in.a)))) {
      if (p.cursor >= p.mailbox.size()) return SliceEnd::Blocked;
    }

    w_.count_instruction(in.op);
    w_.charge(p, 1);

    auto pop = [&st] {
      Value v = std::move(st.back());
      st.pop_back();
      return v;
    };
    auto throw_fault = [&](std::string_view tag) { return raise(p, fault(tag)); };
    bool alive = true;

    switch (in.op) {
      case Op::PushInt:
        st.push_back(Value::integer(in.a));
        ++f.ip;
        break;
      case Op::PushBool:
        st.push_back(Value::boolean(in.a != 0));
        ++f.ip;
        break;
      case Op::PushStr: {
        const auto& s = m_->constants[in.a];
        w_.allocate(p, static_cast<std::int64_t>(s.size()), "string");
        st.push_back(Value::str(s));
        ++f.ip;
        break;
      }
      case Op::PushUnit:
        st.push_back(Value::unit());
        ++f.ip;
        break;
      case Op::Load:
        st.push_back(f.locals[in.a]);
        ++f.ip;
        break;
      case Op::Store:
        f.locals[in.a] = pop();
        ++f.ip;
        break;
      case Op::Pop:
        st.pop_back();
        ++f.ip;
        break;
      case Op::Dup:
        st.push_back(st.back());
        ++f.ip;
        break;
      case Op::MakeClosure: {
        std::vector<Value> caps;
        caps.reserve(in.slots.size());
        for (int s : in.slots) caps.push_back(f.locals[s]);
        st.push_back(w_.make_closure(p, static_cast<int>(in.a), std::move(caps)));
        ++f.ip;
        break;
      }
      case Op::Call:
      case Op::TailCall: {
        auto n = static_cast<std::size_t>(in.a);
        const Value& callee = st[st.size() - n - 1];
        if (!callee.is(Tag::Closure)) {
          alive = throw_fault("type_error");
          break;
        }
        const auto& c = callee.as_closure();
        if (c.arity != static_cast<int>(n)) {
          alive = throw_fault("bad_arity");
          break;
        }
        Frame nf = new_frame(c.fn, std::span<const Value>(st).subspan(st.size() - n), c.captures);
        st.resize(st.size() - n - 1);
        if (in.op == Op::TailCall) frames.pop_back();
        frames.push_back(std::move(nf));
        break;
      }
      case Op::Ret: {
        Value v = pop();
        frames.pop_back();
        if (!deliver(p, std::move(v))) return SliceEnd::Exited;
        break;
      }
      case Op::CallBuiltin: {
        auto b = static_cast<Builtin>(in.a);
        auto n = static_cast<std::size_t>(in.b);
        std::vector<Value> args(std::make_move_iterator(st.end() - static_cast<std::ptrdiff_t>(n)),
                                std::make_move_iterator(st.end()));
        w_.charge(p, w_.builtin_surcharge(b, args));
        BuiltinResult r = w_.call_builtin(p, b, args);
        switch (r.kind) {
          case BuiltinResult::Kind::Return: {
            Frame& top = frames.back();
            top.stack.resize(top.stack.size() - n);
            top.stack.push_back(std::move(r.value));
            ++top.ip;
            break;
          }
          case BuiltinResult::Kind::Throw:
            frames.back().stack.resize(frames.back().stack.size() - n);
            alive = raise(p, std::move(r.value));
            break;
          case BuiltinResult::Kind::HostMap: {
            Frame& top = frames.back();
            top.stack.resize(top.stack.size() - n);
            if (r.items.empty()) {
              top.stack.push_back(Value::nil());
              ++top.ip;
              break;
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
            break;
          }
        }
        break;
      }
      case Op::Jump:
        f.ip = in.a;
        break;
      case Op::JumpIfFalse: {
        Value c = pop();
        if (!c.is(Tag::Bool)) {
          alive = throw_fault("type_error");
          break;
        }
        f.ip = c.as_bool() ? f.ip + 1 : in.a;
        break;
      }
      case Op::MakeTuple: {
        auto n = static_cast<std::ptrdiff_t>(in.a);
        std::vector<Value> xs(std::make_move_iterator(st.end() - n),
                              std::make_move_iterator(st.end()));
        st.resize(st.size() - static_cast<std::size_t>(n));
        w_.allocate(p, in.a + 1, "tuple");
        st.push_back(Value::tuple(std::move(xs)));
        ++f.ip;
        break;
      }
      case Op::MakeList: {
        auto n = static_cast<std::size_t>(in.a);
        Value l = Value::list(std::span<const Value>(st).subspan(st.size() - n));
        st.resize(st.size() - n);
        w_.allocate(p, 2 * in.a, "list");
        st.push_back(std::move(l));
        ++f.ip;
        break;
      }
      case Op::Cons: {
        Value t = pop();
        Value h = pop();
        if (!t.is(Tag::List)) {
          alive = throw_fault("type_error");
          break;
        }
        w_.allocate(p, 2, "cons");
        st.push_back(Value::cons(std::move(h), std::move(t)));
        ++f.ip;
        break;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Lt:
      case Op::Le: {
        Value r = pop();
        Value l = pop();
        if (!l.is(Tag::Int) || !r.is(Tag::Int)) {
          alive = throw_fault("type_error");
          break;
        }
        auto res = arith(in.op, l.as_int(), r.as_int());
        if (!res) {
          alive = throw_fault("arith_error");
          break;
        }
        st.push_back(*res);
        ++f.ip;
        break;
      }
      case Op::Eq:
      case Op::Ne: {
        Value r = pop();
        Value l = pop();
        bool eq = value_equal(l, r);
        st.push_back(Value::boolean(in.op == Op::Eq ? eq : !eq));
        ++f.ip;
        break;
      }
      case Op::Concat: {
        Value r = pop();
        Value l = pop();
        if (!l.is(Tag::Str) || !r.is(Tag::Str)) {
          alive = throw_fault("type_error");
          break;
        }
        std::string s = l.as_str() + r.as_str();
        w_.allocate(p, static_cast<std::int64_t>(s.size()), "concat");
        st.push_back(Value::str(std::move(s)));
        ++f.ip;
        break;
      }
      case Op::Throw:
        alive = raise(p, pop());
        break;
      case Op::TryPush:
        f.handlers.push_back({in.a, st.size()});
        ++f.ip;
        break;
      case Op::TryPop:
        f.handlers.pop_back();
        ++f.ip;
        break;
      case Op::TestInt: {
        const Value& v = st.back();
        f.ip = (v.is(Tag::Int) && v.as_int() == in.a) ? f.ip + 1 : in.b;
        break;
      }
      case Op::TestBool: {
        const Value& v = st.back();
        f.ip = (v.is(Tag::Bool) && v.as_bool() == (in.a != 0)) ? f.ip + 1 : in.b;
        break;
      }
      case Op::TestStr: {
        const Value& v = st.back();
        f.ip = (v.is(Tag::Str) && v.as_str() == m_->constants[in.a]) ? f.ip + 1 : in.b;
        break;
      }
      case Op::TestUnit:
        f.ip = st.back().is(Tag::Unit) ? f.ip + 1 : in.a;
        break;
      case Op::TestNil:
        f.ip = st.back().is_nil() ? f.ip + 1 : in.a;
        break;
      case Op::TestCons: {
        if (!st.back().is_cons()) {
          f.ip = in.a;
          break;
        }
        Value v = st.back();
        st.push_back(v.head());
        st.push_back(v.tail());
        ++f.ip;
        break;
      }
      case Op::TestTuple: {
        const Value& v = st.back();
        if (!v.is(Tag::Tuple) || v.items().size() != static_cast<std::size_t>(in.a)) {
          f.ip = in.b;
          break;
        }
        Value t = v;
        for (const auto& x : t.items()) st.push_back(x);
        ++f.ip;
        break;
      }
      case Op::RecvFetch:
        st.push_back(p.mailbox[p.cursor++]);
        ++f.ip;
        break;
      case Op::RecvAccept: {
        BuiltinResult r = w_.call_builtin(p, Builtin::RecvAccept, {});
        if (r.kind == BuiltinResult::Kind::Throw) {
          alive = raise(p, std::move(r.value));
          break;
        }
        ++f.ip;
        break;
      }
      case Op::RecvReset:
        p.cursor = 0;
        ++f.ip;
        break;
    }
    if (!alive) return SliceEnd::Crashed;
  }
}

}  // namespace

std::unique_ptr<Engine> make_bytecode_engine(World& w, std::shared_ptr<const Module> m) {
  return std::make_unique<BytecodeEngine>(w, std::move(m));
}

}  // namespace gl
