#include <doctest.h>

#include "gl/harness.hpp"
#include "gl/selfemu.hpp"

namespace {

gl::Module compile_src(const std::string& src) {
  auto p = gl::parse_source(src);
  REQUIRE(gl::check(p).empty());
  return gl::compile(p);
}

void same_as_direct(const std::string& src) {
  auto m = compile_src(src);
  auto direct = gl::run_module(std::make_shared<const gl::Module>(m), {});
  auto emu = gl::run_emulated(m);
  CHECK_FALSE(emu.emulator_failed);
  CHECK(gl::serialize_report(emu.report, false) == gl::serialize_report(direct, false));
  CHECK(emu.report.host.reductions > direct.host.reductions);
}

gl::RunReport run_wrapper_text(const std::string& tail) {
  auto src = gl::selfemu_source() + tail;
  return gl::run_source(src, {});
}

}  // namespace

TEST_SUITE("selfemu") {

TEST_CASE("strip_hooks") {
  std::string src = "a\n#@hook clock\nb\n#@else\n#| c\n#@end\nd\n";
  CHECK(gl::strip_hooks(src, {}) == "a\n\nb\n\n#| c\n\nd\n");
  CHECK(gl::strip_hooks(src, {"clock"}) == "a\n\n\n\nc\n\nd\n");
  CHECK(gl::strip_hooks(src, {"mem"}) == gl::strip_hooks(src, {}));
  CHECK_THROWS_AS(gl::strip_hooks(src, {"nope"}), std::invalid_argument);
  CHECK_THROWS_AS(gl::strip_hooks("#@hook clock\nx\n", {}), std::invalid_argument);
  CHECK_THROWS_AS(gl::strip_hooks("#@end\n", {}), std::invalid_argument);
  CHECK_THROWS_AS(gl::strip_hooks("#@hook other\n#@end\n", {}), std::invalid_argument);
  CHECK_THROWS_AS(gl::strip_hooks("#@hook clock\n#@else\nbare\n#@end\n", {"clock"}),
                  std::invalid_argument);
}

TEST_CASE("every hook exists in the asset and variants keep line counts") {
  auto raw = std::string(gl::selfemu_raw_source());
  auto lines = std::count(raw.begin(), raw.end(), '\n');
  for (const auto& h : gl::hook_names()) {
    CAPTURE(h);
    CHECK(raw.find("#@hook " + h + "\n") != std::string::npos);
    auto v = gl::selfemu_source({h});
    CHECK(v != raw);
    CHECK(std::count(v.begin(), v.end(), '\n') == lines);
  }
  std::set<std::string> all(gl::hook_names().begin(), gl::hook_names().end());
  auto none = gl::selfemu_source(all);
  CHECK(std::count(none.begin(), none.end(), '\n') == lines);
}

TEST_CASE("project") {
  gl::RunReport host;
  host.outcome = gl::OutcomeKind::Value;
  host.prints = {{0, "#emu:from 1"}, {0, "hi"}, {0, "#emu:OUTCOME value 7"},
                 {0, "#emu:METER pid=0 red=3 alloc=0"}, {0, "#emu:METER pid=1 red=4 alloc=2"}};
  host.host.reductions = 99;
  auto e = gl::project(host);
  CHECK_FALSE(e.emulator_failed);
  CHECK(e.report.outcome_value == "7");
  REQUIRE(e.report.prints.size() == 1);
  CHECK(e.report.prints[0].pid == 1);
  CHECK(e.report.prints[0].text == "hi");
  CHECK(e.report.meters.size() == 2);
  CHECK(e.report.host.reductions == 99);

  host.prints.insert(host.prints.begin(), {0, "stray"});
  CHECK(gl::project(host).emulator_failed);

  gl::RunReport fuel;
  fuel.outcome = gl::OutcomeKind::FuelExhausted;
  fuel.prints = {{0, "#emu:from 0"}, {0, "x"}};
  auto f = gl::project(fuel);
  CHECK(f.report.outcome == gl::OutcomeKind::FuelExhausted);
  CHECK(f.report.prints.size() == 1);
}

TEST_CASE("emulated runs match direct runs") {
  same_as_direct("fn main() = 42");
  same_as_direct("fn main() = 1/0");
  same_as_direct("fn main() = (vtime(), let x = 1 + 2 * 3 in vtime(), mem_used())");
  same_as_direct("fn main() = host_map([1, 2], fn (x) -> x * 2)");
  same_as_direct("fn main() = host_map([1], fn (x) -> throw \"e\")");
  same_as_direct("fn main() = host_map([], fn (x) -> print(\"never\"))");
  same_as_direct("fn f(n) = if n == 0 then stacktrace() else (f(n - 1), 0)\nfn main() = f(2)");
  same_as_direct("fn main() = (fun_id(fn () -> 1), sys_info(\"mode\"), self())");
  same_as_direct(R"(
fn ping(n, peer) = if n == 0 then send(peer, "stop") else
  let _ = send(peer, ("ping", self())) in receive { "pong" -> ping(n - 1, peer) }
fn pong() = receive { ("ping", from) -> let _ = print("ping") in let _ = send(from, "pong") in pong(),
                      "stop" -> "done" }
fn main() = let p = spawn(fn () -> pong()) in ping(3, p)
)");
}

TEST_CASE("emulated sys_info mode is masked to native") {
  auto m = compile_src("fn main() = sys_info(\"mode\")");
  CHECK(gl::run_emulated(m).report.outcome_value == "\"native\"");
  gl::EmuOptions o;
  o.disabled_hooks = {"sys_info"};
  CHECK(gl::run_emulated(m, o).report.outcome_value != "\"native\"");
}

TEST_CASE("malformed reified input raises bad_code") {
  for (const char* lit : {
           "[(\"main\", 0, 0, [(\"BOGUS\", [])], [1]), (\"entry\", 0)]",
           "[(\"main\", 0, 0, [(\"PUSH_INT\", [])], [1]), (\"entry\", 0)]",
           "[(\"main\", 0, 0, [(\"CALL_BUILTIN\", [99, 0])], [1]), (\"entry\", 0)]",
           "42",
       }) {
    CAPTURE(lit);
    auto r = run_wrapper_text(std::string("\nfn main() = emu_main(") + lit + ")\n");
    auto e = gl::project(r);
    CHECK(e.report.outcome == gl::OutcomeKind::Crash);
    CHECK(e.report.outcome_value.find("bad_code") != std::string::npos);
  }
}

TEST_CASE("the emulator never delegates guest code to the host") {
  auto prog = gl::parse_source(gl::selfemu_source() + "\nfn main() = 0\n");
  REQUIRE(gl::check(prog).empty());
  auto m = gl::compile(prog);
  std::set<int> banned = {static_cast<int>(gl::Builtin::Spawn), static_cast<int>(gl::Builtin::Send),
                          static_cast<int>(gl::Builtin::RecvFetch),
                          static_cast<int>(gl::Builtin::RecvAccept),
                          static_cast<int>(gl::Builtin::RecvReset)};
  for (const auto& f : m.functions)
    for (const auto& in : f.code) {
      CAPTURE(*f.name);
      if (in.op == gl::Op::CallBuiltin) CHECK(banned.count(static_cast<int>(in.a)) == 0);
      if (in.op == gl::Op::MakeClosure) CHECK(in.a < static_cast<std::int64_t>(m.functions.size()));
      CHECK(in.op != gl::Op::RecvFetch);
    }
}

TEST_CASE("host frame depth stays bounded for deep emulated recursion") {
  auto m = compile_src("fn down(n) = if n == 0 then 0 else 1 + down(n - 1)\nfn main() = down(10000)");
  gl::EmuOptions o;
  o.debug = true;
  auto e = gl::run_emulated(m, o);
  CHECK(e.report.outcome_value == "10000");
  REQUIRE(e.host_depth);
  CHECK(*e.host_depth <= 64);
}

}
