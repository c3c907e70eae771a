#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gl/harness.hpp"
#include "gl/vm.hpp"

namespace fs = std::filesystem;

namespace {

gl::RunReport direct_run(const std::string& src) { return gl::run_source(src, {}); }

gl::PairReport passing_pair(const std::string& id) {
  gl::PairReport p;
  p.id = id;
  p.strong.distinguishable = true;
  p.strong.overhead_reductions = 10;
  return p;
}

fs::path temp_corpus(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("gl_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("weak comparison") {
  auto a = direct_run("fn main() = let _ = print(\"x\") in let _ = print(\"y\") in 1");
  CHECK(gl::compare_weak(a, a).pass);

  auto b = a;
  b.host.reductions += 1000;
  b.host.instructions += 5;
  CHECK(gl::compare_weak(a, b).pass);

  auto c = a;
  c.prints[1].text = "z";
  auto v = gl::compare_weak(a, c);
  CHECK_FALSE(v.pass);
  REQUIRE(v.diffs.size() == 1);
  CHECK(v.diffs[0].field == "print[1]");
  CHECK(v.diffs[0].direct == "0 \"y\"");
  CHECK(v.diffs[0].emulated == "0 \"z\"");

  auto d = a;
  d.prints.pop_back();
  auto w = gl::compare_weak(a, d);
  CHECK_FALSE(w.pass);
  CHECK(w.diffs[0].emulated == "<none>");

  auto e = a;
  e.meters[0].reductions += 1;
  CHECK(gl::compare_weak(a, e).diffs[0].field == "meter[0]");
}

TEST_CASE("prefix comparison") {
  auto full = direct_run("fn main() = let _ = print(\"a\") in let _ = print(\"b\") in 1");
  auto cut = full;
  cut.prints.pop_back();
  CHECK(gl::compare_prefix(cut, full).pass);
  CHECK_FALSE(gl::compare_prefix(full, cut).pass);
}

TEST_CASE("strong comparison") {
  auto a = direct_run("fn main() = 1");
  auto s = gl::compare_strong(a, a);
  CHECK_FALSE(s.distinguishable);
  CHECK(s.overhead_reductions == doctest::Approx(1.0));

  gl::RunReport x, y;
  x.host = {10, 20, 30};
  y.host = {10, 20, 30};
  CHECK_FALSE(gl::compare_strong(x, y).distinguishable);
  y.host.alloc = 31;
  CHECK(gl::compare_strong(x, y).distinguishable);
}

TEST_CASE("checklist map and report") {
  auto dir = temp_corpus("map");
  write(dir / "checklist_map",
        "# comment\nT3 | Row one | pass | a, b\nT4 | Row two | gap | a, *\n"
        "T4 | Row three | out-of-scope: not modeled | \n");
  auto rows = gl::load_checklist_map(dir / "checklist_map");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].tests == std::vector<std::string>{"a", "b"});
  CHECK(rows[2].expect == "out-of-scope");
  CHECK(rows[2].reason == "not modeled");

  std::vector<gl::PairReport> pairs = {passing_pair("a"), passing_pair("b")};
  auto rep = gl::checklist_report(pairs, rows);
  CHECK(rep.rows[0].status == gl::RowStatus::Pass);
  CHECK(rep.rows[1].status == gl::RowStatus::Gap);
  CHECK(rep.rows[2].status == gl::RowStatus::OutOfScope);

  pairs[1].weak.pass = false;
  CHECK(gl::checklist_report(pairs, rows).rows[0].status == gl::RowStatus::NotDemonstrated);

  pairs.pop_back();
  CHECK_THROWS_AS(gl::checklist_report(pairs, rows), gl::CoverageError);

  auto text = gl::serialize_checklist(rep);
  auto back = gl::parse_checklist(text);
  REQUIRE(back.rows.size() == 3);
  CHECK(back.rows[1].label == "Row two");
  CHECK(back.rows[1].status == gl::RowStatus::Gap);
  CHECK(back.rows[0].tests == rep.rows[0].tests);
  CHECK(gl::serialize_checklist(back) == text);

  write(dir / "checklist_map", "T3 | only three | pass\n");
  CHECK_THROWS_AS(gl::load_checklist_map(dir / "checklist_map"), std::invalid_argument);
  CHECK_THROWS_AS(gl::parse_checklist("ROW T3 bogus-status \"x\" tests=[] evidence=\"\"\n"),
                  std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("coverage guard") {
  auto empty = temp_corpus("empty");
  CHECK(gl::difftest(empty, {}).exit_code == 7);

  auto small = temp_corpus("small");
  write(small / "one.gl", "fn main() = 1 + 2\n");
  write(small / "checklist_map", "T3 | Row | pass | one\n");
  auto r = gl::difftest(small, {});
  CHECK(r.exit_code == 7);
  CHECK(r.pairs.size() == 1);
  CHECK(r.pairs[0].weak.pass);

  write(small / "checklist_map", "T3 | Row | pass | missing\n");
  CHECK(gl::difftest(small, {}).exit_code == 7);
  fs::remove_all(empty);
  fs::remove_all(small);
}

TEST_CASE("corpus entries and fuel directive") {
  auto corpus = gl::load_corpus(GL_CORPUS_DIR);
  int programs = 0, probes = 0, divergence = 0;
  for (const auto& e : corpus) {
    if (e.kind == gl::EntryKind::Program) ++programs;
    if (e.kind == gl::EntryKind::Probe) ++probes;
    if (e.kind == gl::EntryKind::Divergence) ++divergence;
    if (e.id == "infinite_loop") CHECK(e.fuel == 20000);
  }
  CHECK(programs >= 25);
  CHECK(probes == 5);
  CHECK(divergence >= 2);
  CHECK(std::is_sorted(corpus.begin(), corpus.end(),
                       [](const auto& a, const auto& b) { return a.id < b.id; }));
}

TEST_CASE("a divergence pair") {
  gl::CorpusEntry e;
  e.id = "d";
  e.kind = gl::EntryKind::Divergence;
  e.source = "fn main() = if true then 1 else nope\n";
  auto p = gl::run_pair(e, {});
  CHECK(p.rejected_by_check);
  REQUIRE(p.unchecked);
  CHECK(p.unchecked->outcome_value == "1");
  CHECK(p.ok());
}

}
