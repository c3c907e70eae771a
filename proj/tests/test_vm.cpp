#include <doctest.h>

#include <map>

#include "gl/harness.hpp"
#include "gl/vm.hpp"

namespace {

gl::RunReport run(const std::string& src, gl::Mode mode = gl::Mode::Bytecode,
                  std::optional<std::int64_t> fuel = std::nullopt) {
  gl::RunOptions o;
  o.mode = mode;
  o.fuel = fuel;
  return gl::run_source(src, o);
}

std::vector<gl::CorpusEntry> programs() {
  std::vector<gl::CorpusEntry> out;
  for (auto& e : gl::load_corpus(GL_CORPUS_DIR))
    if (e.kind != gl::EntryKind::Divergence) out.push_back(std::move(e));
  return out;
}

}  // namespace

TEST_SUITE("vm") {

TEST_CASE("run examples") {
  auto v = run("fn main() = 42");
  CHECK(v.outcome == gl::OutcomeKind::Value);
  CHECK(v.outcome_value == "42");

  auto c = run("fn main() = 1/0");
  CHECK(c.outcome == gl::OutcomeKind::Crash);
  CHECK(c.outcome_value == "\"arith_error\"");
  CHECK(c.outcome_trace == "[(\"main\", 1)]");

  auto s = run("fn main() = let p = spawn(fn () -> receive { 1 -> print(\"hi\") }) in send(p, 1)");
  CHECK(s.outcome_value == "1");
  REQUIRE(s.prints.size() == 1);
  CHECK(s.prints[0].pid == 1);
  CHECK(s.prints[0].text == "hi");
}

TEST_CASE("builtin examples") {
  CHECK(run("fn main() = vtime()").outcome_value == "2");
  CHECK(run("fn main() = stacktrace()").outcome_value == "[(\"main\", 1)]");
  CHECK(run("fn main() = send(to_pid(9), 1)").outcome_value == "\"bad_pid\"");
  CHECK(run("fn main() = try get(1) catch (e, t) -> e").outcome_value == "\"type_error\"");
  CHECK(run("fn main() = 9223372036854775807 + 1").outcome_value == "\"arith_error\"");
  CHECK(run("fn main() = sys_info(\"version\")").outcome_value == "\"gl-1\"");
  CHECK(run("fn main() = sys_info(\"mode\")").outcome_value == "\"native\"");
  CHECK(run("fn main() = let f = fn () -> 1 in let g = fn () -> 2 in (fun_id(f), fun_id(g))")
            .outcome_value == "(0, 1)");
}

TEST_CASE("vtime counts retired instructions") {
  // instructions up to and including CALL_BUILTIN, plus its surcharge
  auto src = "fn main() = let x = 1 + 2 in vtime()";
  auto m = gl::compile(gl::parse_source(src));
  std::size_t before = 0;
  for (const auto& in : m.functions[0].code) {
    ++before;
    if (in.op == gl::Op::CallBuiltin) break;
  }
  CHECK(run(src).outcome_value == std::to_string(before + 1));
}

TEST_CASE("host_map") {
  CHECK(run("fn main() = host_map([1, 2, 3], fn (x) -> x * 2)").outcome_value == "[2, 4, 6]");
  auto t = run("fn main() = host_map([1], fn (x) -> throw \"e\")");
  CHECK(t.outcome_value == "\"e\"");
  CHECK(t.outcome_trace.find("main.lambda0") != std::string::npos);
  CHECK(t.outcome_trace.find("main") != std::string::npos);
  auto e = run("fn main() = host_map([], fn (x) -> print(\"called\"))");
  CHECK(e.outcome_value == "[]");
  CHECK(e.prints.empty());
}

TEST_CASE("scheduler") {
  CHECK(run("fn main() = 1 + 1").main_reductions() == 4);

  auto src = R"(
fn burn(n) = if n == 0 then 0 else burn(n - 1)
fn worker(tag, k) = if k == 0 then 0 else
  let _ = burn(20) in let _ = print(tag) in worker(tag, k - 1)
fn main() =
  let a = spawn(fn () -> worker("a", 6)) in
  let b = spawn(fn () -> worker("b", 6)) in 0
)";
  auto r = run(src);
  REQUIRE(r.prints.size() == 12);
  CHECK(r.prints.front().text == "a");
  bool switched_back = false;
  for (std::size_t i = 2; i < r.prints.size(); ++i)
    if (r.prints[i].text == "a" && r.prints[i - 1].text == "b") switched_back = true;
  CHECK(switched_back);

  auto d = run("fn main() = let p = spawn(fn () -> receive { x -> x }) in receive { y -> y }");
  CHECK(d.outcome == gl::OutcomeKind::Deadlock);
  CHECK(d.outcome_value == "[<pid:0>, <pid:1>]");
}

TEST_CASE("fun_id order is the same in both modes") {
  auto src = R"(
fn mk(n) = fn () -> n
fn main() =
  let fs = host_map([1, 2, 3], fn (i) -> mk(i)) in
  let g = fn () -> 0 in
  (host_map(fs, fn (f) -> fun_id(f)), fun_id(g))
)";
  auto b = run(src);
  auto a = run(src, gl::Mode::Ast);
  CHECK(b.outcome_value == a.outcome_value);
  CHECK(gl::serialize_report(a, false) == gl::serialize_report(b, false));
}

TEST_CASE("corpus: determinism and mode agreement") {
  for (const auto& e : programs()) {
    CAPTURE(e.id);
    auto b1 = run(e.source, gl::Mode::Bytecode, e.fuel);
    auto b2 = run(e.source, gl::Mode::Bytecode, e.fuel);
    CHECK(gl::serialize_report(b1) == gl::serialize_report(b2));
    auto a = run(e.source, gl::Mode::Ast, e.fuel);
    CHECK(gl::serialize_report(a, false) == gl::serialize_report(b1, false));
  }
}

TEST_CASE("corpus: allocation meters equal the sum of audited charges") {
  for (const auto& e : programs()) {
    CAPTURE(e.id);
    gl::RunOptions o;
    o.fuel = e.fuel;
    o.audit = true;
    auto r = gl::run_source(e.source, o);
    REQUIRE(r.audit);
    std::map<std::int64_t, std::int64_t> sum;
    for (const auto& c : r.audit->charges) {
      CHECK(c.units >= 0);
      sum[c.pid] += c.units;
    }
    for (const auto& m : r.meters) CHECK(m.alloc == sum[m.pid]);
  }
}

TEST_CASE("corpus: fuel monotonicity") {
  for (const auto& e : programs()) {
    CAPTURE(e.id);
    std::vector<gl::PrintEntry> prev;
    for (std::int64_t f : {5, 50, 200, 1000, 5000}) {
      auto r = run(e.source, gl::Mode::Bytecode, f);
      REQUIRE(r.prints.size() >= prev.size());
      for (std::size_t i = 0; i < prev.size(); ++i) {
        CHECK(r.prints[i].pid == prev[i].pid);
        CHECK(r.prints[i].text == prev[i].text);
      }
      prev = r.prints;
    }
  }
}

TEST_CASE("report serialization round trips") {
  for (const auto& e : programs()) {
    CAPTURE(e.id);
    auto r = run(e.source, gl::Mode::Bytecode, e.fuel);
    auto text = gl::serialize_report(r);
    CHECK(gl::serialize_report(gl::parse_report(text)) == text);
  }
}

TEST_CASE("malformed modules raise HostError") {
  gl::Module m;
  gl::Function f;
  f.name = std::make_shared<const std::string>("main");
  f.code = {{gl::Op::Jump, 7, 0, {}}};
  f.lines = {1};
  m.functions.push_back(f);
  CHECK_THROWS_AS(gl::validate_module(m), gl::HostError);
}

}
