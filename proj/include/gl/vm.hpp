#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gl/ast.hpp"
#include "gl/frontend.hpp"
#include "gl/module.hpp"
#include "gl/report.hpp"
#include "gl/value.hpp"

namespace gl {

enum class Mode { Bytecode, Ast, AstUnchecked };

std::string_view mode_name(Mode m);
std::optional<Mode> mode_from_name(std::string_view name);

/// Reductions a process may retire before it is rotated out.
inline constexpr std::int64_t kSliceBudget = 100;

/// Allocation units charged to the spawning process.
inline constexpr std::int64_t kSpawnCost = 8;

struct RunOptions {
  Mode mode = Mode::Bytecode;
  std::optional<std::int64_t> fuel;  // cap on total reductions across all processes
  bool audit = false;
  std::vector<Value> main_mailbox;  // messages queued for pid 0 before it starts
};

enum class ProcStatus { Runnable, Blocked, Exited, Crashed };

enum class SliceEnd { Yield, Blocked, Exited, Crashed, FuelOut };

struct EngineState {
  virtual ~EngineState() = default;
};

struct Process {
  std::int64_t pid = 0;
  ProcStatus status = ProcStatus::Runnable;
  std::vector<Value> mailbox;
  std::size_t cursor = 0;
  std::int64_t reductions = 0;
  std::int64_t alloc = 0;
  std::int64_t slice_used = 0;
  std::int64_t next_closure_id = 0;
  Value result;
  std::unique_ptr<EngineState> engine;
};

class World;

/// Executes guest code for one process. Implemented by the bytecode
/// interpreter and by the syntax-tree evaluator.
class Engine {
 public:
  virtual ~Engine() = default;
  virtual void start(Process& p, int fn, std::vector<Value> captures) = 0;
  virtual SliceEnd run_slice(Process& p) = 0;
  /// Innermost-first list of (function name, line) tuples.
  virtual Value stacktrace(const Process& p) const = 0;
  virtual std::shared_ptr<const std::string> function_name(int fn) const = 0;
  virtual int function_arity(int fn) const = 0;
};

enum class Gate { Go, Yield, FuelOut };

/// Result of a builtin call as seen by an engine.
struct BuiltinResult {
  enum class Kind { Return, Throw, HostMap } kind = Kind::Return;
  Value value;  // Return: result, Throw: exception
  std::vector<Value> items;  // HostMap: list elements
  Value fn;                  // HostMap: callback closure
};

class World {
 public:
  World(std::shared_ptr<const Module> module, RunOptions opts);
  World(std::shared_ptr<const Program> program, RunOptions opts);
  ~World();

  RunReport run();

  // Engine services.
  Gate gate(const Process& p) const;
  void charge(Process& p, std::int64_t reductions);
  void allocate(Process& p, std::int64_t units, const char* what);
  void count_instruction(Op op);
  void count_task() { ++host_instructions_; }
  Value make_closure(Process& p, int fn, std::vector<Value> captures);

  /// Surcharge (beyond the instruction's own reduction) for a builtin call.
  std::int64_t builtin_surcharge(Builtin b, std::span<const Value> args) const;
  bool builtin_blocks(const Process& p, Builtin b) const;
  BuiltinResult call_builtin(Process& p, Builtin b, std::span<const Value> args);
  /// Records an uncaught exception and marks the process crashed.
  void crash(Process& p, Value exc, Value trace);

  Engine& engine() { return *engine_; }
  const RunOptions& options() const { return opts_; }

 private:
  Process& spawn_process();
  void wake(Process& p);

  RunOptions opts_;
  std::shared_ptr<const Module> module_;
  std::shared_ptr<const Program> program_;
  std::unique_ptr<Engine> engine_;
  std::vector<std::unique_ptr<Process>> procs_;
  std::deque<std::int64_t> run_queue_;
  std::vector<PrintEntry> prints_;
  std::vector<CrashEntry> crashes_;
  std::map<std::int64_t, Value> refs_;
  std::int64_t next_ref_id_ = 0;
  std::string crash_trace_;
  std::int64_t total_reductions_ = 0;
  std::int64_t host_instructions_ = 0;
  std::optional<AuditLog> audit_;
};

std::unique_ptr<Engine> make_bytecode_engine(World& w, std::shared_ptr<const Module> m);
std::unique_ptr<Engine> make_ast_engine(World& w, std::shared_ptr<const Program> p);

/// Guest exception value for a named fault ("type_error", "arith_error", ...).
Value fault(std::string_view tag);

RunReport run_module(std::shared_ptr<const Module> m, RunOptions opts);
RunReport run_program(std::shared_ptr<const Program> p, RunOptions opts);

/// Parses, checks (unless ast-unchecked) and runs source text.
/// Front-end failures throw SourceError or CheckFailed.
RunReport run_source(std::string_view source, RunOptions opts);

class CheckFailed : public std::runtime_error {
 public:
  explicit CheckFailed(std::vector<CheckError> errs);
  const std::vector<CheckError>& errors() const { return errors_; }

 private:
  std::vector<CheckError> errors_;
};

}  // namespace gl
