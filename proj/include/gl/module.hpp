#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gl {

enum class Op : std::uint8_t {
  PushInt, PushBool, PushStr, PushUnit, Load, Store, Pop, Dup, MakeClosure,
  Call, TailCall, Ret, CallBuiltin, Jump, JumpIfFalse, MakeTuple, MakeList, Cons,
  Add, Sub, Mul, Div, Lt, Le, Eq, Ne, Concat, Throw, TryPush, TryPop,
  TestInt, TestBool, TestStr, TestUnit, TestNil, TestCons, TestTuple,
  RecvFetch, RecvAccept, RecvReset,
};

inline constexpr std::size_t kOpCount = static_cast<std::size_t>(Op::RecvReset) + 1;

std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

// Immediate layout:
//   PushInt a=n | PushBool a=0/1 | PushStr a=pool index | Load/Store a=slot
//   MakeClosure a=function, slots=capture slots | Call/TailCall a=argc
//   CallBuiltin a=builtin, b=argc | Jump/JumpIfFalse/TryPush a=target
//   MakeTuple/MakeList a=n | TestInt a=n b=target | TestBool a=0/1 b=target
//   TestStr a=pool index b=target | TestUnit/TestNil/TestCons a=target
//   TestTuple a=n b=target
struct Instr {
  Op op = Op::PushUnit;
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::vector<int> slots;
};

struct Function {
  std::shared_ptr<const std::string> name;
  int arity = 0;
  int n_slots = 0;
  std::vector<Instr> code;
  std::vector<int> lines;
};

struct Module {
  std::vector<Function> functions;
  std::vector<std::string> constants;
  int entry = 0;
};

/// Checks jump targets, slots, pool and function indices. Throws HostError.
void validate_module(const Module& m);

struct BuiltinInfo {
  std::string_view name;
  int arity;
};

enum class Builtin : int {
  Print, Vtime, MemUsed, Stacktrace, FunId, Self, Spawn, Send, RecvFetch, RecvAccept,
  RecvReset, HostMap, Ref, Get, Set, SysInfo, Show, TypeOf, Elem, SetElem, TupleSize,
  ListToTuple, TupleMake, StrLen, ToPid,
};

inline constexpr std::array<BuiltinInfo, 25> kBuiltins = {{
    {"print", 1},     {"vtime", 0},         {"mem_used", 0},      {"stacktrace", 0},
    {"fun_id", 1},    {"self", 0},          {"spawn", 1},         {"send", 2},
    {"__recv_fetch", 0}, {"__recv_accept", 0}, {"__recv_reset", 0}, {"host_map", 2},
    {"ref", 1},       {"get", 1},           {"set", 2},           {"sys_info", 1},
    {"show", 1},      {"type_of", 1},       {"elem", 2},          {"setelem", 3},
    {"tuple_size", 1}, {"list_to_tuple", 1}, {"tuple_make", 2},   {"strlen", 1},
    {"to_pid", 1},
}};

int find_builtin(std::string_view name);

}  // namespace gl
