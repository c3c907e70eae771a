#include <array>
#include <sstream>

#include "gl/frontend.hpp"
#include "gl/module.hpp"

namespace gl {

namespace {

constexpr std::array<std::string_view, kOpCount> kOpNames = {
    "PUSH_INT", "PUSH_BOOL", "PUSH_STR", "PUSH_UNIT", "LOAD", "STORE", "POP", "DUP",
    "MAKE_CLOSURE", "CALL", "TAILCALL", "RET", "CALL_BUILTIN", "JUMP", "JUMP_IF_FALSE",
    "MAKE_TUPLE", "MAKE_LIST", "CONS", "ADD", "SUB", "MUL", "DIV", "LT", "LE", "EQ", "NE",
    "CONCAT", "THROW", "TRY_PUSH", "TRY_POP", "TEST_INT", "TEST_BOOL", "TEST_STR",
    "TEST_UNIT", "TEST_NIL", "TEST_CONS", "TEST_TUPLE", "RECV_FETCH", "RECV_ACCEPT",
    "RECV_RESET"};

// Jump target carried by an instruction, if any.
std::optional<std::int64_t> target_of(const Instr& in) {
  switch (in.op) {
    case Op::Jump:
    case Op::JumpIfFalse:
    case Op::TryPush:
    case Op::TestUnit:
    case Op::TestNil:
    case Op::TestCons:
      return in.a;
    case Op::TestInt:
    case Op::TestBool:
    case Op::TestStr:
    case Op::TestTuple:
      return in.b;
    default:
      return std::nullopt;
  }
}

}  // namespace

std::string_view op_name(Op op) { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<Op> op_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kOpCount; ++i)
    if (kOpNames[i] == name) return static_cast<Op>(i);
  return std::nullopt;
}

int find_builtin(std::string_view name) {
  for (std::size_t i = 0; i < kBuiltins.size(); ++i)
    if (kBuiltins[i].name == name) return static_cast<int>(i);
  return -1;
}

void validate_module(const Module& m) {
  auto nf = static_cast<std::int64_t>(m.functions.size());
  if (m.entry < 0 || m.entry >= nf) throw HostError("bad entry function");
  for (const auto& f : m.functions) {
    auto n = static_cast<std::int64_t>(f.code.size());
    const std::string& name = f.name ? *f.name : std::string("?");
    if (f.lines.size() != f.code.size()) throw HostError(name + ": line table size mismatch");
    if (f.n_slots < f.arity) throw HostError(name + ": fewer slots than parameters");
    if (f.code.empty() || (f.code.back().op != Op::Ret && f.code.back().op != Op::Jump &&
                               f.code.back().op != Op::Throw && f.code.back().op != Op::TailCall))
      throw HostError(name + ": code may fall off the end");
    for (std::int64_t i = 0; i < n; ++i) {
      const Instr& in = f.code[i];
      if (f.lines[i] < 1) throw HostError(name + ": line numbers must be positive");
      if (auto t = target_of(in); t && (*t < 0 || *t >= n))
        throw HostError(name + ": bad jump target " + std::to_string(*t) + " at " +
                        std::to_string(i));
      switch (in.op) {
        case Op::Load:
        case Op::Store:
          if (in.a < 0 || in.a >= f.n_slots) throw HostError(name + ": bad slot");
          break;
        case Op::PushStr:
        case Op::TestStr:
          if (in.a < 0 || in.a >= static_cast<std::int64_t>(m.constants.size()))
            throw HostError(name + ": bad constant index");
          break;
        case Op::MakeClosure: {
          if (in.a < 0 || in.a >= nf) throw HostError(name + ": bad function index");
          const auto& callee = m.functions[in.a];
          if (callee.arity + static_cast<int>(in.slots.size()) > callee.n_slots)
            throw HostError(name + ": closure captures exceed callee slots");
          for (int s : in.slots)
            if (s < 0 || s >= f.n_slots) throw HostError(name + ": bad capture slot");
          break;
        }
        case Op::CallBuiltin:
          if (in.a < 0 || in.a >= static_cast<std::int64_t>(kBuiltins.size()) ||
              kBuiltins[in.a].arity != in.b)
            throw HostError(name + ": bad builtin call");
          break;
        case Op::MakeTuple:
        case Op::MakeList:
        case Op::TestTuple:
        case Op::Call:
        case Op::TailCall:
          if (in.a < 0) throw HostError(name + ": negative count");
          break;
        default:
          break;
      }
    }
  }
}

std::string disassemble(const Module& m) {
  std::ostringstream out;
  bool first = true;
  auto nl = [&] {
    if (!first) out << '\n';
    first = false;
  };
  for (const auto& f : m.functions) {
    nl();
    out << "== " << *f.name << '/' << f.arity << " slots=" << f.n_slots << " ==";
    for (std::size_t i = 0; i < f.code.size(); ++i) {
      const Instr& in = f.code[i];
      nl();
      out << i << ": " << op_name(in.op);
      switch (in.op) {
        case Op::PushInt:
        case Op::Load:
        case Op::Store:
        case Op::Call:
        case Op::TailCall:
        case Op::Jump:
        case Op::JumpIfFalse:
        case Op::MakeTuple:
        case Op::MakeList:
        case Op::TryPush:
        case Op::TestUnit:
        case Op::TestNil:
        case Op::TestCons:
          out << ' ' << in.a;
          break;
        case Op::PushBool:
          out << ' ' << (in.a ? "true" : "false");
          break;
        case Op::PushStr:
          out << ' ' << in.a << ' ' << quote_string(m.constants[in.a]);
          break;
        case Op::MakeClosure: {
          out << ' ' << in.a << " [";
          for (std::size_t k = 0; k < in.slots.size(); ++k) out << (k ? ", " : "") << in.slots[k];
          out << ']';
          break;
        }
        case Op::CallBuiltin:
          out << ' ' << kBuiltins[in.a].name << ' ' << in.b;
          break;
        case Op::TestInt:
        case Op::TestTuple:
          out << ' ' << in.a << ' ' << in.b;
          break;
        case Op::TestBool:
          out << ' ' << (in.a ? "true" : "false") << ' ' << in.b;
          break;
        case Op::TestStr:
          out << ' ' << in.a << ' ' << quote_string(m.constants[in.a]) << ' ' << in.b;
          break;
        default:
          break;
      }
      out << " ; line=" << f.lines[i];
    }
  }
  return out.str();
}

Value reify(const Module& m) {
  std::vector<Value> fns;
  fns.reserve(m.functions.size() + 1);
  for (const auto& f : m.functions) {
    std::vector<Value> code;
    code.reserve(f.code.size());
    for (const auto& in : f.code) {
      std::vector<Value> imm;
      auto I = [](std::int64_t v) { return Value::integer(v); };
      switch (in.op) {
        case Op::PushInt:
        case Op::Load:
        case Op::Store:
        case Op::Call:
        case Op::TailCall:
        case Op::Jump:
        case Op::JumpIfFalse:
        case Op::MakeTuple:
        case Op::MakeList:
        case Op::TryPush:
        case Op::TestUnit:
        case Op::TestNil:
        case Op::TestCons:
          imm = {I(in.a)};
          break;
        case Op::PushBool:
          imm = {Value::boolean(in.a != 0)};
          break;
        case Op::PushStr:
          imm = {Value::str(m.constants[in.a])};
          break;
        case Op::MakeClosure:
          imm.push_back(I(in.a));
          for (int s : in.slots) imm.push_back(I(s));
          break;
        case Op::CallBuiltin:
        case Op::TestInt:
        case Op::TestTuple:
          imm = {I(in.a), I(in.b)};
          break;
        case Op::TestBool:
          imm = {Value::boolean(in.a != 0), I(in.b)};
          break;
        case Op::TestStr:
          imm = {Value::str(m.constants[in.a]), I(in.b)};
          break;
        default:
          break;
      }
      code.push_back(Value::tuple({Value::str(std::string(op_name(in.op))), Value::list(imm)}));
    }
    std::vector<Value> lines;
    lines.reserve(f.lines.size());
    for (int l : f.lines) lines.push_back(Value::integer(l));
    fns.push_back(Value::tuple({Value::str(*f.name), Value::integer(f.arity),
                                Value::integer(f.n_slots), Value::list(code),
                                Value::list(lines)}));
  }
  fns.push_back(Value::tuple({Value::str("entry"), Value::integer(m.entry)}));
  return Value::list(fns);
}

}  // namespace gl
