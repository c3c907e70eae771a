#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gl/harness.hpp"
#include "gl/vm.hpp"

namespace {

gl::Module compile_src(const std::string& src) {
  auto p = gl::parse_source(src);
  REQUIRE(gl::check(p).empty());
  return gl::compile(p);
}

std::vector<std::string> check_messages(const std::string& src) {
  std::vector<std::string> out;
  for (const auto& e : gl::check(gl::parse_source(src))) out.push_back(e.to_string());
  return out;
}

}  // namespace

TEST_SUITE("frontend") {

TEST_CASE("tokens") {
  auto t = gl::tokenize("fn main() = 42");
  REQUIRE(t.size() == 7);
  CHECK(t[0].is_keyword("fn"));
  CHECK(t[1].kind == gl::TokKind::Ident);
  CHECK(t[1].text == "main");
  CHECK(t[2].kind == gl::TokKind::LParen);
  CHECK(t[3].kind == gl::TokKind::RParen);
  CHECK(t[4].kind == gl::TokKind::Assign);
  CHECK(t[5].kind == gl::TokKind::Int);
  CHECK(t[5].ival == 42);
  CHECK(t[6].kind == gl::TokKind::End);

  auto c = gl::tokenize("1 # c\n2");
  REQUIRE(c.size() == 3);
  CHECK(c[0].ival == 1);
  CHECK(c[1].ival == 2);
  CHECK(c[1].line == 2);

  CHECK_THROWS_AS(gl::tokenize("\"abc"), gl::LexError);
  CHECK_THROWS_AS(gl::tokenize("fn main() = $"), gl::LexError);
}

TEST_CASE("parse precedence and associativity") {
  auto p = gl::parse_source("fn main() = 1 + 2 * 3");
  const auto& e = *p.defs[0].body;
  REQUIRE(e.kind == gl::ExprKind::BinOp);
  CHECK(e.op == gl::BinOpKind::Add);
  CHECK(e.kids[1]->op == gl::BinOpKind::Mul);

  auto q = gl::parse_source("fn main() = 1 :: 2 :: []");
  const auto& c = *q.defs[0].body;
  CHECK(c.op == gl::BinOpKind::Cons);
  CHECK(c.kids[0]->kind == gl::ExprKind::IntLit);
  CHECK(c.kids[1]->op == gl::BinOpKind::Cons);

  auto s = gl::parse_source("fn main() = 10 - 3 - 2");
  CHECK(s.defs[0].body->kids[0]->op == gl::BinOpKind::Sub);

  CHECK_THROWS_AS(gl::parse_source("fn main() = 1 < 2 < 3"), gl::ParseError);
}

TEST_CASE("parse match with a cons pattern") {
  auto p = gl::parse_source("fn f(l) = match l { h :: t -> h, [] -> 0 }\nfn main() = f([1])");
  const auto& m = *p.defs[0].body;
  REQUIRE(m.kind == gl::ExprKind::Match);
  REQUIRE(m.arms.size() == 2);
  CHECK(m.arms[0].pat.kind == gl::Pattern::Kind::Cons);
  CHECK(m.arms[0].pat.kids[0].text == "h");
  CHECK(m.arms[1].pat.kind == gl::Pattern::Kind::Nil);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(gl::parse_source("fn main() = let x = in 1"), gl::ParseError);
  CHECK_THROWS_AS(gl::parse_source("fn main( = 1"), gl::ParseError);
  try {
    gl::parse_source("fn main() =\n\n  (1,");
    FAIL("expected ParseError");
  } catch (const gl::ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("check") {
  CHECK(check_messages("fn main() = 1").empty());
  auto unbound = check_messages("fn main() = x");
  REQUIRE(unbound.size() == 1);
  CHECK(unbound[0].find("x") != std::string::npos);
  CHECK(check_messages("fn f(a, a) = a\nfn main() = f(1, 2)").size() == 1);
  CHECK(check_messages("fn main() = match (1, 1) { (a, a) -> a }").size() == 1);
  CHECK(check_messages("fn main() = nosuch(1)").size() == 1);
  CHECK(check_messages("fn main() = print(1, 2)").size() == 1);
  CHECK(check_messages("fn helper() = 1").size() == 1);
  CHECK(check_messages("fn main() = let r = __recv_reset() in r").empty());
  CHECK(check_messages("fn main() = let x = 1 in x").empty());
  CHECK(check_messages("fn main() = (let x = 1 in x, x)").size() == 1);
}

TEST_CASE("compile and reify the minimal program") {
  auto m = compile_src("fn main() = 42");
  REQUIRE(m.functions.size() == 1);
  const auto& f = m.functions[0];
  REQUIRE(f.code.size() == 2);
  CHECK(f.code[0].op == gl::Op::PushInt);
  CHECK(f.code[0].a == 42);
  CHECK(f.code[1].op == gl::Op::Ret);
  CHECK(f.lines == std::vector<int>{1, 1});
  CHECK(gl::format_value(gl::reify(m)) ==
        "[(\"main\", 0, 0, [(\"PUSH_INT\", [42]), (\"RET\", [])], [1, 1]), (\"entry\", 0)]");
}

TEST_CASE("lambdas are lifted") {
  auto m = compile_src("fn main() = fn (x) -> x");
  REQUIRE(m.functions.size() == 2);
  CHECK(*m.functions[1].name == "main.lambda0");
  CHECK(m.functions[1].arity == 1);
  bool found = false;
  for (const auto& in : m.functions[0].code)
    if (in.op == gl::Op::MakeClosure && in.a == 1) found = true;
  CHECK(found);
}

TEST_CASE("match without a matching arm throws match_error") {
  auto r = gl::run_source("fn main() = match 1 { 2 -> 0 }", {});
  CHECK(r.outcome == gl::OutcomeKind::Crash);
  CHECK(r.outcome_value == "\"match_error\"");
  gl::RunOptions ast;
  ast.mode = gl::Mode::Ast;
  auto a = gl::run_source("fn main() = match 1 { 2 -> 0 }", ast);
  CHECK(a.outcome_value == r.outcome_value);
}

TEST_CASE("disassembly") {
  auto m = compile_src("fn main() = 42");
  CHECK(gl::disassemble(m) == "== main/0 slots=0 ==\n0: PUSH_INT 42 ; line=1\n1: RET ; line=1");
  CHECK(gl::disassemble(m) == gl::disassemble(m));

  auto add = compile_src("fn main() = 1+2");
  auto text = gl::disassemble(add);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(add.functions[0].code.size() == 4);
}

TEST_CASE("corpus: compilation is deterministic, formatting round trips, reify is injective") {
  auto corpus = gl::load_corpus(GL_CORPUS_DIR);
  REQUIRE(corpus.size() >= 25);
  std::map<std::string, std::string> reified;
  for (const auto& e : corpus) {
    if (e.kind == gl::EntryKind::Divergence) continue;
    CAPTURE(e.id);
    auto p = gl::parse_source(e.source);
    auto again = gl::parse_source(gl::format_program(p));
    CHECK(gl::ast_equal(p, again));
    auto m1 = compile_src(e.source);
    auto m2 = compile_src(e.source);
    CHECK(gl::disassemble(m1) == gl::disassemble(m2));
    auto r = gl::format_value(gl::reify(m1));
    CHECK(r == gl::format_value(gl::reify(m2)));
    auto [it, fresh] = reified.emplace(r, gl::disassemble(m1));
    if (!fresh) CHECK(it->second == gl::disassemble(m1));
  }
}

TEST_CASE("reify distinguishes modules differing in one immediate or line") {
  auto a = gl::format_value(gl::reify(compile_src("fn main() = 1")));
  auto b = gl::format_value(gl::reify(compile_src("fn main() = 2")));
  auto c = gl::format_value(gl::reify(compile_src("fn main() =\n1")));
  CHECK(a != b);
  CHECK(a != c);
}

}
