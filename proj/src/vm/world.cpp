#include <algorithm>

#include "gl/vm.hpp"

namespace gl {

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Bytecode: return "bytecode";
    case Mode::Ast: return "ast";
    case Mode::AstUnchecked: return "ast-unchecked";
  }
  return "bytecode";
}

std::optional<Mode> mode_from_name(std::string_view name) {
  if (name == "bytecode") return Mode::Bytecode;
  if (name == "ast") return Mode::Ast;
  if (name == "ast-unchecked") return Mode::AstUnchecked;
  return std::nullopt;
}

Value fault(std::string_view tag) { return Value::str(std::string(tag)); }

CheckFailed::CheckFailed(std::vector<CheckError> errs)
    : std::runtime_error(errs.empty() ? "check failed" : errs.front().to_string()),
      errors_(std::move(errs)) {}

World::World(std::shared_ptr<const Module> module, RunOptions opts)
    : opts_(std::move(opts)), module_(std::move(module)) {
  engine_ = make_bytecode_engine(*this, module_);
}

World::World(std::shared_ptr<const Program> program, RunOptions opts)
    : opts_(std::move(opts)), program_(std::move(program)) {
  engine_ = make_ast_engine(*this, program_);
}

World::~World() = default;

Gate World::gate(const Process& p) const {
  if (p.slice_used >= kSliceBudget) return Gate::Yield;
  if (opts_.fuel && total_reductions_ >= *opts_.fuel) return Gate::FuelOut;
  return Gate::Go;
}

void World::charge(Process& p, std::int64_t reductions) {
  p.reductions += reductions;
  p.slice_used += reductions;
  total_reductions_ += reductions;
}

void World::allocate(Process& p, std::int64_t units, const char* what) {
  if (units == 0) return;
  p.alloc += units;
  if (audit_) audit_->charges.push_back({p.pid, units, what});
}

void World::count_instruction(Op op) {
  ++host_instructions_;
  if (audit_) ++audit_->op_counts[static_cast<std::size_t>(op)];
}

Value World::make_closure(Process& p, int fn, std::vector<Value> captures) {
  allocate(p, static_cast<std::int64_t>(captures.size()) + 2, "closure");
  return Value::closure(fn, engine_->function_name(fn), engine_->function_arity(fn),
                        std::move(captures), p.next_closure_id++, p.pid);
}

Process& World::spawn_process() {
  auto p = std::make_unique<Process>();
  p->pid = static_cast<std::int64_t>(procs_.size());
  procs_.push_back(std::move(p));
  run_queue_.push_back(procs_.back()->pid);
  return *procs_.back();
}

void World::wake(Process& p) {
  if (p.status != ProcStatus::Blocked) return;
  p.status = ProcStatus::Runnable;
  run_queue_.push_back(p.pid);
}

void World::crash(Process& p, Value exc, Value trace) {
  p.status = ProcStatus::Crashed;
  p.result = exc;
  crashes_.push_back({p.pid, format_value(exc), format_value(trace)});
  if (p.pid == 0) crash_trace_ = format_value(trace);
}

std::int64_t World::builtin_surcharge(Builtin b, std::span<const Value> args) const {
  switch (b) {
    case Builtin::Print: return 0;
    case Builtin::HostMap:
      return args[0].is(Tag::List) ? static_cast<std::int64_t>(args[0].list_length()) : 0;
    default: return 1;
  }
}

bool World::builtin_blocks(const Process& p, Builtin b) const {
  return b == Builtin::RecvFetch && p.cursor >= p.mailbox.size();
}

namespace {

BuiltinResult ret(Value v) { return {BuiltinResult::Kind::Return, std::move(v), {}, {}}; }
BuiltinResult thr(std::string_view tag) { return {BuiltinResult::Kind::Throw, fault(tag), {}, {}}; }

bool proper_list(const Value& v) {
  if (!v.is(Tag::List)) return false;
  const Value* cur = &v;
  while (cur->is_cons()) cur = &cur->tail();
  return cur->is(Tag::List);
}

}  // namespace

BuiltinResult World::call_builtin(Process& p, Builtin b, std::span<const Value> args) {
  switch (b) {
    case Builtin::Print: {
      if (!args[0].is(Tag::Str)) return thr("type_error");
      prints_.push_back({p.pid, args[0].as_str()});
      return ret(Value::unit());
    }
    case Builtin::Vtime: return ret(Value::integer(p.reductions));
    case Builtin::MemUsed: return ret(Value::integer(p.alloc));
    case Builtin::Stacktrace: {
      Value t = engine_->stacktrace(p);
      allocate(p, value_size(t), "stacktrace");
      return ret(t);
    }
    case Builtin::FunId:
      if (!args[0].is(Tag::Closure)) return thr("type_error");
      return ret(Value::integer(args[0].as_closure().id));
    case Builtin::Self: return ret(Value::pid(p.pid));
    case Builtin::Spawn: {
      if (!args[0].is(Tag::Closure)) return thr("type_error");
      const auto& c = args[0].as_closure();
      if (c.arity != 0) return thr("bad_arity");
      allocate(p, kSpawnCost, "spawn");
      Process& child = spawn_process();
      engine_->start(child, c.fn, c.captures);
      return ret(Value::pid(child.pid));
    }
    case Builtin::Send: {
      if (!args[0].is(Tag::Pid)) return thr("type_error");
      auto target = args[0].as_pid();
      if (target < 0 || target >= static_cast<std::int64_t>(procs_.size())) return thr("bad_pid");
      allocate(p, value_size(args[1]), "send");
      Process& t = *procs_[target];
      t.mailbox.push_back(args[1]);
      wake(t);
      return ret(args[1]);
    }
    case Builtin::RecvFetch: return ret(p.mailbox[p.cursor++]);
    case Builtin::RecvAccept:
      if (p.cursor == 0) return thr("bad_receive");
      p.mailbox.erase(p.mailbox.begin() + static_cast<std::ptrdiff_t>(p.cursor - 1));
      p.cursor = 0;
      return ret(Value::unit());
    case Builtin::RecvReset:
      p.cursor = 0;
      return ret(Value::unit());
    case Builtin::HostMap: {
      if (!proper_list(args[0]) || !args[1].is(Tag::Closure)) return thr("type_error");
      BuiltinResult r;
      r.kind = BuiltinResult::Kind::HostMap;
      r.items = args[0].list_items();
      r.fn = args[1];
      if (!r.items.empty() && r.fn.as_closure().arity != 1) return thr("bad_arity");
      return r;
    }
    case Builtin::Ref: {
      allocate(p, 1 + value_size(args[0]), "ref");
      auto id = next_ref_id_++;
      refs_[id] = args[0];
      return ret(Value::ref(id));
    }
    case Builtin::Get: {
      if (!args[0].is(Tag::Ref)) return thr("type_error");
      auto it = refs_.find(args[0].as_ref());
      if (it == refs_.end()) return thr("bad_ref");
      return ret(it->second);
    }
    case Builtin::Set: {
      if (!args[0].is(Tag::Ref)) return thr("type_error");
      auto it = refs_.find(args[0].as_ref());
      if (it == refs_.end()) return thr("bad_ref");
      allocate(p, value_size(args[1]), "set");
      it->second = args[1];
      return ret(Value::unit());
    }
    case Builtin::SysInfo: {
      if (!args[0].is(Tag::Str)) return thr("type_error");
      const auto& k = args[0].as_str();
      if (k == "version") return ret(Value::str("gl-1"));
      if (k == "mode") return ret(Value::str("native"));
      return thr("bad_arg");
    }
    case Builtin::Show: {
      std::string s = format_value(args[0]);
      allocate(p, static_cast<std::int64_t>(s.size()), "show");
      return ret(Value::str(std::move(s)));
    }
    case Builtin::TypeOf: return ret(Value::str(std::string(tag_name(args[0].tag()))));
    case Builtin::Elem: {
      if (!args[0].is(Tag::Tuple) || !args[1].is(Tag::Int)) return thr("type_error");
      const auto& xs = args[0].items();
      auto i = args[1].as_int();
      if (i < 0 || i >= static_cast<std::int64_t>(xs.size())) return thr("index_error");
      return ret(xs[i]);
    }
    case Builtin::SetElem: {
      if (!args[0].is(Tag::Tuple) || !args[1].is(Tag::Int)) return thr("type_error");
      auto xs = args[0].items();
      auto i = args[1].as_int();
      if (i < 0 || i >= static_cast<std::int64_t>(xs.size())) return thr("index_error");
      xs[i] = args[2];
      allocate(p, static_cast<std::int64_t>(xs.size()) + 1, "setelem");
      return ret(Value::tuple(std::move(xs)));
    }
    case Builtin::TupleSize:
      if (!args[0].is(Tag::Tuple)) return thr("type_error");
      return ret(Value::integer(static_cast<std::int64_t>(args[0].items().size())));
    case Builtin::ListToTuple: {
      if (!proper_list(args[0])) return thr("type_error");
      auto xs = args[0].list_items();
      allocate(p, static_cast<std::int64_t>(xs.size()) + 1, "list_to_tuple");
      return ret(Value::tuple(std::move(xs)));
    }
    case Builtin::TupleMake: {
      if (!args[0].is(Tag::Int)) return thr("type_error");
      auto n = args[0].as_int();
      if (n < 0 || n > (1 << 24)) return thr("bad_arg");
      allocate(p, n + 1, "tuple_make");
      return ret(Value::tuple(std::vector<Value>(static_cast<std::size_t>(n), args[1])));
    }
    case Builtin::StrLen:
      if (!args[0].is(Tag::Str)) return thr("type_error");
      return ret(Value::integer(static_cast<std::int64_t>(args[0].as_str().size())));
    case Builtin::ToPid:
      if (!args[0].is(Tag::Int)) return thr("type_error");
      if (args[0].as_int() < 0) return thr("bad_arg");
      return ret(Value::pid(args[0].as_int()));
  }
  return thr("type_error");
}

RunReport World::run() {
  if (opts_.audit) audit_.emplace();
  Process& main = spawn_process();
  main.mailbox = opts_.main_mailbox;
  engine_->start(main, module_ ? module_->entry : program_->find_def("main"), {});

  bool fuel_out = false;
  while (!run_queue_.empty()) {
    auto pid = run_queue_.front();
    run_queue_.pop_front();
    Process& p = *procs_[pid];
    if (p.status != ProcStatus::Runnable) continue;
    p.slice_used = 0;
    SliceEnd end = engine_->run_slice(p);
    if (end == SliceEnd::Yield) {
      run_queue_.push_back(pid);
    } else if (end == SliceEnd::Blocked) {
      p.status = ProcStatus::Blocked;
    } else if (end == SliceEnd::Exited) {
      p.status = ProcStatus::Exited;
    } else if (end == SliceEnd::FuelOut) {
      fuel_out = true;
      break;
    }
  }

  RunReport r;
  r.mode = std::string(mode_name(opts_.mode));
  const Process& p0 = *procs_[0];
  if (p0.status == ProcStatus::Exited) {
    r.outcome = OutcomeKind::Value;
    r.outcome_value = format_value(p0.result);
    r.value = p0.result;
  } else if (p0.status == ProcStatus::Crashed) {
    r.outcome = OutcomeKind::Crash;
    r.outcome_value = format_value(p0.result);
    r.outcome_trace = crash_trace_;
    r.value = p0.result;
  } else if (fuel_out) {
    r.outcome = OutcomeKind::FuelExhausted;
  } else {
    r.outcome = OutcomeKind::Deadlock;
    std::vector<Value> blocked;
    for (const auto& q : procs_)
      if (q->status == ProcStatus::Blocked) blocked.push_back(Value::pid(q->pid));
    r.outcome_value = format_value(Value::list(blocked));
  }
  r.prints = std::move(prints_);
  r.crashes = std::move(crashes_);
  for (const auto& q : procs_) {
    r.meters.push_back({q->pid, q->reductions, q->alloc});
    r.host.alloc += q->alloc;
  }
  r.host.instructions = host_instructions_;
  r.host.reductions = total_reductions_;
  r.audit = std::move(audit_);
  r.final_main_mailbox = p0.mailbox;
  return r;
}

RunReport run_module(std::shared_ptr<const Module> m, RunOptions opts) {
  opts.mode = Mode::Bytecode;
  return World(std::move(m), std::move(opts)).run();
}

RunReport run_program(std::shared_ptr<const Program> p, RunOptions opts) {
  if (opts.mode == Mode::Bytecode) opts.mode = Mode::Ast;
  return World(std::move(p), std::move(opts)).run();
}

RunReport run_source(std::string_view source, RunOptions opts) {
  auto prog = std::make_shared<Program>(parse_source(source));
  if (opts.mode != Mode::AstUnchecked) {
    auto errs = check(*prog);
    if (!errs.empty()) throw CheckFailed(std::move(errs));
  } else if (int m = prog->find_def("main"); m < 0 || !prog->defs[m].params.empty()) {
    throw CheckFailed({CheckError{1, "missing main/0"}});
  }
  if (opts.mode == Mode::Bytecode)
    return run_module(std::make_shared<const Module>(compile(*prog)), std::move(opts));
  return run_program(std::move(prog), std::move(opts));
}

std::int64_t RunReport::main_reductions() const {
  for (const auto& m : meters)
    if (m.pid == 0) return m.reductions;
  return 0;
}

std::int64_t RunReport::main_alloc() const {
  for (const auto& m : meters)
    if (m.pid == 0) return m.alloc;
  return 0;
}

}  // namespace gl
