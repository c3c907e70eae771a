// Acceptance run: one PASS/FAIL line per criterion. Usage: gl_acceptance CORPUS_DIR GL_BINARY
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sys/wait.h>

#include "gl/harness.hpp"
#include "gl/selfemu.hpp"
#include "receive_oracle.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void report(int n, bool ok, const std::string& detail, bool blocking = true) {
  std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << "  " << detail
            << (blocking ? "" : "  (non-blocking)") << std::endl;
  if (!ok && blocking) ++failures;
}

bool compared(const gl::PairReport& p) { return p.kind != gl::EntryKind::Divergence; }

std::set<std::string> emulator_function_names() {
  auto prog = gl::parse_source(gl::selfemu_source() + "\nfn main() = 0\n");
  auto m = gl::compile(prog);
  std::set<std::string> names;
  for (const auto& f : m.functions) names.insert(*f.name);
  names.erase("main");
  return names;
}

int run_cli(const std::string& cmd) {
  int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: gl_acceptance CORPUS_DIR GL_BINARY\n";
    return 4;
  }
  const std::string corpus = argv[1];
  const std::string gl_bin = argv[2];

  // 1. weak completeness over the corpus
  auto t0 = Clock::now();
  auto res = gl::difftest(corpus, {});
  double secs = since(t0);
  {
    int n = 0, pass = 0;
    std::string bad;
    for (const auto& p : res.pairs) {
      if (!compared(p)) continue;
      ++n;
      if (p.valid && p.weak.pass) ++pass;
      else bad += " " + p.id;
    }
    bool ok = n >= 25 && pass == n && res.exit_code != 7 && secs < 60;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d/%d programs weak PASS, coverage %s, %.1f s", pass, n,
                  res.exit_code == 7 ? "FAILED" : "ok", secs);
    report(1, ok, buf + (bad.empty() ? "" : "; failing:" + bad));
  }

  // 2. strong incompleteness: emulated host reductions exceed direct
  {
    int n = 0, more = 0;
    double lo = 0, hi = 0;
    for (const auto& p : res.pairs) {
      if (!compared(p) || !p.valid || p.direct.host.instructions == 0) continue;
      double f = p.strong.overhead_reductions;
      lo = n == 0 ? f : std::min(lo, f);
      hi = n == 0 ? f : std::max(hi, f);
      ++n;
      if (p.emulated.host.reductions > p.direct.host.reductions) ++more;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d/%d programs, reduction overhead %.2fx to %.2fx", more, n, lo, hi);
    report(2, n > 0 && more == n, buf);
  }

  // 3. ast and bytecode agree
  {
    int n = 0, same = 0;
    std::string bad;
    for (const auto& p : res.pairs) {
      if (!compared(p) || !p.modes_agree) continue;
      ++n;
      if (*p.modes_agree) ++same;
      else bad += " " + p.id;
    }
    report(3, n >= 25 && same == n,
           std::to_string(same) + "/" + std::to_string(n) + " programs agree" + bad);
  }

  // 4. checker divergence
  {
    int n = 0;
    for (const auto& p : res.pairs)
      if (p.kind == gl::EntryKind::Divergence && p.ok()) ++n;
    report(4, n >= 2, std::to_string(n) + " programs rejected by check yet produce a value unchecked");
  }

  // 5. sabotage sensitivity
  {
    bool ok = true;
    std::string detail;
    for (const auto& hook : gl::hook_names()) {
      int rc = run_cli(gl_bin + " difftest " + corpus + " --sabotage " + hook);
      gl::HarnessOptions ho;
      ho.sabotage = {hook};
      auto s = gl::difftest(corpus, ho);
      std::string failing;
      for (const auto& p : s.pairs)
        if (p.kind == gl::EntryKind::Probe && !p.ok()) failing += (failing.empty() ? "" : ",") + p.id;
      bool hook_ok = rc == 6 && s.exit_code == 6 && !failing.empty();
      ok = ok && hook_ok;
      detail += hook + "->exit " + std::to_string(rc) + " [" + failing + "] ";
    }
    report(5, ok, detail);
  }

  // 6. fault fidelity
  {
    auto emu_names = emulator_function_names();
    const std::vector<std::string> crashing = {"div0", "match_error", "throw", "bad_pid", "deadlock"};
    bool ok = true;
    std::string detail;
    for (const auto& id : crashing) {
      const gl::PairReport* p = nullptr;
      for (const auto& q : res.pairs)
        if (q.id == id) p = &q;
      bool this_ok = p && p->valid && p->weak.pass &&
                     p->direct.outcome != gl::OutcomeKind::Value &&
                     gl::serialize_report(p->direct, false) == gl::serialize_report(p->emulated, false);
      if (p) {
        std::string traces = p->emulated.outcome_trace;
        for (const auto& c : p->emulated.crashes) traces += c.trace;
        for (const auto& n : emu_names)
          if (traces.find("(\"" + n + "\",") != std::string::npos) this_ok = false;
      }
      ok = ok && this_ok;
      detail += id + (this_ok ? " ok " : " BAD ");
    }
    report(6, ok, detail);
  }

  // 7. explicit stack bound
  {
    auto src = gl::load_corpus(corpus);
    std::string detail = "deep_recursion missing";
    bool ok = false;
    for (const auto& e : src) {
      if (e.id != "deep_recursion") continue;
      auto m = gl::compile(gl::parse_source(e.source));
      gl::EmuOptions eo;
      eo.debug = true;
      auto run = gl::run_emulated(m, eo);
      auto direct = gl::run_module(std::make_shared<const gl::Module>(m), {});
      ok = !run.emulator_failed && run.report.outcome_value == direct.outcome_value &&
           run.host_depth && *run.host_depth <= 64;
      detail = "outcome " + run.report.outcome_value + ", sampled emulator depth " +
               (run.host_depth ? std::to_string(*run.host_depth) : "none") + " (bound 64)";
    }
    report(7, ok, detail);
  }

  // 8. determinism
  {
    auto again = gl::difftest(corpus, {});
    auto a = gl::serialize_difftest(res);
    auto b = gl::serialize_difftest(again);
    report(8, a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different"));
  }

  // 9. selective receive oracle
  {
    auto r = recv_oracle::check_all(gl::Mode::Bytecode);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%ld cases, %zu mismatches, %.2f s", r.cases, r.failures.size(),
                  r.seconds);
    report(9, r.failures.empty() && r.seconds <= 1.0, buf);
    for (const auto& f : r.failures) std::cout << "  " << f << '\n';
  }

  // 10. emulator under the emulator
  {
    auto inner = gl::wrapper_source(gl::compile(gl::parse_source("fn main() = 42")), {});
    auto prog = gl::parse_source(inner);
    bool ok = false;
    std::string detail;
    if (!gl::check(prog).empty()) {
      detail = "inner wrapper does not check";
    } else {
      auto t = Clock::now();
      gl::EmuOptions eo;
      eo.fuel = 100'000'000;
      auto outer = gl::run_emulated(gl::compile(prog), eo);
      auto guest = gl::project(outer.report);
      ok = !outer.emulator_failed && !guest.emulator_failed &&
           guest.report.outcome == gl::OutcomeKind::Value && guest.report.outcome_value == "42";
      char buf[200];
      std::snprintf(buf, sizeof buf, "outcome %s %s, host reductions %lld, %.1f s",
                    std::string(gl::outcome_name(guest.report.outcome)).c_str(),
                    guest.report.outcome_value.c_str(),
                    static_cast<long long>(outer.host.host.reductions), since(t));
      detail = buf;
    }
    report(10, ok, detail, false);
  }

  return failures == 0 ? 0 : 1;
}
