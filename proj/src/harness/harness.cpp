#include "gl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "gl/frontend.hpp"
#include "gl/selfemu.hpp"
#include "gl/vm.hpp"

namespace gl {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<std::int64_t> fuel_directive(const std::string& src) {
  std::istringstream in(src);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# fuel:", 0) == 0) return std::stoll(line.substr(7));
    if (!line.empty() && line[0] != '#') break;
  }
  return std::nullopt;
}

void load_dir(const fs::path& dir, const std::string& prefix, EntryKind kind,
              std::vector<CorpusEntry>& out) {
  if (!fs::is_directory(dir)) return;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file() || de.path().extension() != ".gl") continue;
    CorpusEntry e;
    e.id = prefix + de.path().stem().string();
    e.kind = kind;
    e.source = read_file(de.path());
    e.fuel = fuel_directive(e.source);
    auto expect = de.path();
    expect.replace_extension(".expect");
    if (fs::exists(expect)) e.golden = read_file(expect);
    out.push_back(std::move(e));
  }
}

std::string fmt2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::string kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::Program: return "program";
    case EntryKind::Probe: return "probe";
    case EntryKind::Divergence: return "divergence";
  }
  return "program";
}

void first_diff(WeakVerdict& v, std::string field, const std::string& d, const std::string& e) {
  if (!v.pass || d == e) return;
  v.pass = false;
  v.diffs.push_back({std::move(field), d, e});
}

const std::string kMissing = "<none>";

template <class T, class F>
void compare_lists(WeakVerdict& v, const std::string& name, const std::vector<T>& d,
                   const std::vector<T>& e, std::size_t n, F render) {
  for (std::size_t i = 0; i < n && v.pass; ++i)
    first_diff(v, name + "[" + std::to_string(i) + "]", i < d.size() ? render(d[i]) : kMissing,
               i < e.size() ? render(e[i]) : kMissing);
}

std::string render_print(const PrintEntry& p) {
  return std::to_string(p.pid) + " " + quote_string(p.text);
}
std::string render_crash(const CrashEntry& c) {
  return std::to_string(c.pid) + " " + c.exc + " " + c.trace;
}
std::string render_meter(const PidMeter& m) {
  return "pid=" + std::to_string(m.pid) + " red=" + std::to_string(m.reductions) +
         " alloc=" + std::to_string(m.alloc);
}

std::vector<std::string> introspection_reads(const Module& m) {
  static const std::vector<std::pair<Builtin, std::string>> watched = {
      {Builtin::Vtime, "vtime"},         {Builtin::MemUsed, "mem_used"},
      {Builtin::Stacktrace, "stacktrace"}, {Builtin::FunId, "fun_id"},
      {Builtin::Self, "self"},           {Builtin::SysInfo, "sys_info"}};
  std::vector<std::string> out;
  for (const auto& [b, name] : watched) {
    bool used = false;
    for (const auto& f : m.functions)
      for (const auto& in : f.code)
        if (in.op == Op::CallBuiltin && in.a == static_cast<int>(b)) used = true;
    if (used) out.push_back(name);
  }
  return out;
}

}  // namespace

std::vector<CorpusEntry> load_corpus(const fs::path& dir) {
  std::vector<CorpusEntry> out;
  load_dir(dir, "", EntryKind::Program, out);
  load_dir(dir / "probes", "probes/", EntryKind::Probe, out);
  load_dir(dir / "divergence", "divergence/", EntryKind::Divergence, out);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

bool PairReport::ok() const {
  if (kind == EntryKind::Divergence)
    return valid && rejected_by_check && unchecked && unchecked->outcome == OutcomeKind::Value;
  return valid && weak.pass && modes_agree.value_or(true) && golden_ok.value_or(true);
}

WeakVerdict compare_weak(const RunReport& d, const RunReport& e) {
  WeakVerdict v;
  first_diff(v, "outcome", std::string(outcome_name(d.outcome)), std::string(outcome_name(e.outcome)));
  first_diff(v, "outcome.value", d.outcome_value, e.outcome_value);
  first_diff(v, "outcome.trace", d.outcome_trace, e.outcome_trace);
  compare_lists(v, "print", d.prints, e.prints, std::max(d.prints.size(), e.prints.size()), render_print);
  compare_lists(v, "crash", d.crashes, e.crashes, std::max(d.crashes.size(), e.crashes.size()), render_crash);
  compare_lists(v, "meter", d.meters, e.meters, std::max(d.meters.size(), e.meters.size()), render_meter);
  return v;
}

WeakVerdict compare_prefix(const RunReport& d, const RunReport& e) {
  WeakVerdict v;
  first_diff(v, "outcome", std::string(outcome_name(d.outcome)), std::string(outcome_name(e.outcome)));
  compare_lists(v, "print", d.prints, e.prints, d.prints.size(), render_print);
  compare_lists(v, "crash", d.crashes, e.crashes, d.crashes.size(), render_crash);
  return v;
}

StrongVerdict compare_strong(const RunReport& d, const RunReport& e) {
  StrongVerdict s;
  s.distinguishable = d.host.instructions != e.host.instructions ||
                      d.host.reductions != e.host.reductions || d.host.alloc != e.host.alloc;
  s.overhead_reductions = static_cast<double>(e.host.reductions) /
                          static_cast<double>(std::max<std::int64_t>(1, d.host.reductions));
  s.overhead_alloc = static_cast<double>(e.host.alloc) /
                     static_cast<double>(std::max<std::int64_t>(1, d.host.alloc));
  return s;
}

PairReport run_pair(const CorpusEntry& entry, const HarnessOptions& opts) {
  PairReport p;
  p.id = entry.id;
  p.kind = entry.kind;
  std::shared_ptr<Program> prog;
  try {
    prog = std::make_shared<Program>(parse_source(entry.source));
  } catch (const SourceError& e) {
    p.valid = false;
    p.invalid_reason = e.what();
    return p;
  }
  auto errs = check(*prog);

  if (entry.kind == EntryKind::Divergence) {
    p.rejected_by_check = !errs.empty();
    if (!errs.empty()) p.check_error = errs.front().to_string();
    try {
      RunOptions ro;
      ro.mode = Mode::AstUnchecked;
      ro.fuel = entry.fuel;
      p.unchecked = run_source(entry.source, ro);
    } catch (const std::exception& e) {
      p.valid = false;
      p.invalid_reason = e.what();
    }
    return p;
  }

  if (!errs.empty()) {
    p.valid = false;
    p.invalid_reason = errs.front().to_string();
    return p;
  }
  auto module = std::make_shared<const Module>(compile(*prog));
  p.probe_reads = introspection_reads(*module);

  RunOptions ro;
  ro.mode = Mode::Bytecode;
  ro.fuel = entry.fuel;
  ro.audit = true;
  p.direct = run_module(module, ro);
  if (p.direct.audit) p.op_counts = p.direct.audit->op_counts;

  RunOptions ao;
  ao.mode = Mode::Ast;
  ao.fuel = entry.fuel;
  RunReport ast = run_program(prog, ao);
  auto a = serialize_report(ast, false);
  auto b = serialize_report(p.direct, false);
  p.modes_agree = a == b;
  if (!*p.modes_agree) {
    auto v = compare_weak(p.direct, ast);
    if (!v.diffs.empty())
      p.mode_diff = v.diffs.front().field + ": " + v.diffs.front().direct + " vs " + v.diffs.front().emulated;
  }

  if (entry.golden) p.golden_ok = *entry.golden == b;

  EmuOptions eo;
  eo.disabled_hooks = opts.sabotage;
  if (entry.fuel) eo.fuel = *entry.fuel * opts.fuel_scale;
  try {
    auto run = run_emulated(*module, eo);
    p.emulated = std::move(run.report);
    if (run.emulator_failed && p.emulated.outcome != OutcomeKind::FuelExhausted) {
      p.valid = false;
      p.invalid_reason = "emulator failed: " + serialize_report(run.host, false);
    }
  } catch (const AssetError& e) {
    p.valid = false;
    p.invalid_reason = e.what();
    return p;
  }
  p.fuel_prefix = entry.fuel.has_value();
  p.weak = p.fuel_prefix ? compare_prefix(p.direct, p.emulated) : compare_weak(p.direct, p.emulated);
  p.strong = compare_strong(p.direct, p.emulated);
  return p;
}

std::string_view row_status_name(RowStatus s) {
  switch (s) {
    case RowStatus::Pass: return "demonstrated-pass";
    case RowStatus::Gap: return "demonstrated-gap";
    case RowStatus::OutOfScope: return "out-of-scope";
    case RowStatus::NotDemonstrated: return "not-demonstrated";
  }
  return "not-demonstrated";
}

std::vector<ChecklistRow> load_checklist_map(const fs::path& file) {
  std::istringstream in(read_file(file));
  std::vector<ChecklistRow> rows;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string col;
    while (std::getline(ls, col, '|')) cols.push_back(trim(col));
    if (cols.size() != 4) throw std::invalid_argument(file.string() + ":" + std::to_string(n) + ": expected 4 columns");
    ChecklistRow r;
    r.table = cols[0];
    r.label = cols[1];
    r.expect = cols[2];
    if (r.expect.rfind("out-of-scope", 0) == 0) {
      auto colon = r.expect.find(':');
      r.reason = colon == std::string::npos ? "" : trim(r.expect.substr(colon + 1));
      r.expect = "out-of-scope";
    }
    if (r.expect != "pass" && r.expect != "gap" && r.expect != "out-of-scope")
      throw std::invalid_argument(file.string() + ":" + std::to_string(n) + ": bad expectation");
    std::stringstream ts(cols[3]);
    std::string id;
    while (std::getline(ts, id, ',')) {
      id = trim(id);
      if (!id.empty()) r.tests.push_back(id);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

ChecklistReport checklist_report(const std::vector<PairReport>& pairs, std::vector<ChecklistRow> rows) {
  std::map<std::string, const PairReport*> by_id;
  for (const auto& p : pairs) by_id[p.id] = &p;
  for (auto& r : rows) {
    std::vector<std::string> failing;
    for (const auto& t : r.tests) {
      if (t == "*") continue;
      auto it = by_id.find(t);
      if (it == by_id.end())
        throw CoverageError("checklist row \"" + r.label + "\" names missing test " + t);
      if (!it->second->ok()) failing.push_back(t);
    }
    if (r.expect == "out-of-scope") {
      r.status = RowStatus::OutOfScope;
      r.evidence = r.reason;
      continue;
    }
    if (r.tests.empty()) throw CoverageError("checklist row \"" + r.label + "\" has no tests");
    if (!failing.empty()) {
      r.status = RowStatus::NotDemonstrated;
      std::string list;
      for (const auto& f : failing) list += (list.empty() ? "" : ", ") + f;
      r.evidence = "failing: " + list;
      continue;
    }
    if (r.expect == "pass") {
      r.status = RowStatus::Pass;
      r.evidence = std::to_string(r.tests.size()) + " tests pass";
      continue;
    }
    // gap: every compared program must be distinguishable through host meters
    double lo = 0, hi = 0;
    int n = 0, same = 0;
    for (const auto& p : pairs) {
      if (p.kind == EntryKind::Divergence || !p.valid) continue;
      if (!p.strong.distinguishable) ++same;
      lo = n == 0 ? p.strong.overhead_reductions : std::min(lo, p.strong.overhead_reductions);
      hi = n == 0 ? p.strong.overhead_reductions : std::max(hi, p.strong.overhead_reductions);
      ++n;
    }
    if (n == 0) throw CoverageError("checklist row \"" + r.label + "\" has no compared programs");
    r.status = same == 0 ? RowStatus::Gap : RowStatus::NotDemonstrated;
    r.evidence = std::to_string(n - same) + "/" + std::to_string(n) +
                 " distinguishable, reduction overhead " + fmt2(lo) + "x to " + fmt2(hi) + "x";
  }
  return ChecklistReport{std::move(rows)};
}

DifftestResult difftest(const fs::path& corpus_dir, const HarnessOptions& opts) {
  DifftestResult res;
  auto entries = load_corpus(corpus_dir);
  if (entries.empty()) {
    res.problems.push_back("coverage: corpus " + corpus_dir.string() + " is empty");
    res.exit_code = 7;
    return res;
  }

  res.pairs.resize(entries.size());
  std::atomic<std::size_t> next{0};
  unsigned jobs = opts.jobs > 0 ? static_cast<unsigned>(opts.jobs) : std::thread::hardware_concurrency();
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(entries.size())));
  auto work = [&] {
    for (std::size_t i; (i = next++) < entries.size();) {
      try {
        res.pairs[i] = run_pair(entries[i], opts);
      } catch (const std::exception& e) {
        res.pairs[i].id = entries[i].id;
        res.pairs[i].kind = entries[i].kind;
        res.pairs[i].valid = false;
        res.pairs[i].invalid_reason = std::string("harness error: ") + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  bool coverage_fail = false;
  for (const auto& p : res.pairs)
    for (std::size_t k = 0; k < kOpCount; ++k) res.coverage[k] += p.op_counts[k];
  for (std::size_t k = 0; k < kOpCount; ++k)
    if (res.coverage[k] == 0) {
      res.problems.push_back("coverage: opcode " + std::string(op_name(static_cast<Op>(k))) +
                             " never executed");
      coverage_fail = true;
    }

  try {
    res.checklist = checklist_report(res.pairs, load_checklist_map(corpus_dir / "checklist_map"));
  } catch (const CoverageError& e) {
    res.problems.push_back(std::string("coverage: ") + e.what());
    coverage_fail = true;
  } catch (const std::exception& e) {
    res.problems.push_back(std::string("coverage: checklist map: ") + e.what());
    coverage_fail = true;
  }

  bool failed = false;
  for (const auto& p : res.pairs) {
    if (p.ok()) continue;
    failed = true;
    std::string why;
    if (!p.valid) why = "invalid: " + p.invalid_reason;
    else if (p.kind == EntryKind::Divergence) why = "expected a checker divergence";
    else if (!p.weak.pass)
      why = "weak FAIL at " + p.weak.diffs.front().field + ": direct " + p.weak.diffs.front().direct +
            " emulated " + p.weak.diffs.front().emulated;
    else if (!p.modes_agree.value_or(true)) why = "ast and bytecode differ: " + p.mode_diff;
    else why = "golden mismatch";
    res.problems.push_back(p.id + ": " + why);
  }
  for (const auto& r : res.checklist.rows)
    if (r.status == RowStatus::NotDemonstrated) {
      failed = true;
      res.problems.push_back("checklist " + r.table + " \"" + r.label + "\": " + r.evidence);
    }
  res.exit_code = coverage_fail ? 7 : failed ? 6 : 0;
  return res;
}

std::string serialize_pair(const PairReport& p) {
  std::ostringstream out;
  out << "PAIR " << p.id << " kind=" << kind_name(p.kind) << '\n';
  if (!p.valid) out << "INVALID " << quote_string(p.invalid_reason) << '\n';
  if (p.kind == EntryKind::Divergence) {
    out << "CHECK " << (p.rejected_by_check ? "rejected " + quote_string(p.check_error) : "accepted") << '\n';
    if (p.unchecked) {
      std::istringstream in(serialize_report(*p.unchecked, false));
      for (std::string l; std::getline(in, l);) out << "UNCHECKED " << l << '\n';
    }
    out << "END\n";
    return out.str();
  }
  if (p.valid) {
    if (p.weak.pass) {
      out << "WEAK PASS" << (p.fuel_prefix ? " prefix" : "") << '\n';
    } else {
      const auto& d = p.weak.diffs.front();
      out << "WEAK FAIL " << d.field << " direct=" << d.direct << " emulated=" << d.emulated << '\n';
    }
    out << "STRONG " << (p.strong.distinguishable ? "DISTINGUISHABLE" : "INDISTINGUISHABLE")
        << " overhead_red=" << fmt2(p.strong.overhead_reductions)
        << " overhead_alloc=" << fmt2(p.strong.overhead_alloc) << '\n';
  }
  if (!p.probe_reads.empty()) {
    out << "READS";
    for (const auto& r : p.probe_reads) out << ' ' << r;
    out << '\n';
  }
  if (p.modes_agree) out << "MODES " << (*p.modes_agree ? "agree" : "differ") << '\n';
  if (p.golden_ok) out << "GOLDEN " << (*p.golden_ok ? "match" : "mismatch") << '\n';
  if (p.valid) {
    std::istringstream d(serialize_report(p.direct));
    for (std::string l; std::getline(d, l);) out << "DIRECT " << l << '\n';
    std::istringstream e(serialize_report(p.emulated));
    for (std::string l; std::getline(e, l);) out << "EMULATED " << l << '\n';
  }
  out << "END\n";
  return out.str();
}

std::string serialize_checklist(const ChecklistReport& c) {
  std::ostringstream out;
  for (const auto& r : c.rows) {
    out << "ROW " << r.table << ' ' << row_status_name(r.status) << ' ' << quote_string(r.label)
        << " tests=[";
    for (std::size_t i = 0; i < r.tests.size(); ++i) out << (i ? ", " : "") << r.tests[i];
    out << "] evidence=" << quote_string(r.evidence) << '\n';
  }
  return out.str();
}

std::string serialize_difftest(const DifftestResult& r) {
  std::ostringstream out;
  for (const auto& p : r.pairs) out << serialize_pair(p);
  out << "COVERAGE";
  for (std::size_t k = 0; k < kOpCount; ++k)
    out << ' ' << op_name(static_cast<Op>(k)) << '=' << r.coverage[k];
  out << '\n';
  out << serialize_checklist(r.checklist);
  for (const auto& pr : r.problems) out << "PROBLEM " << quote_string(pr) << '\n';
  out << "EXIT " << r.exit_code << '\n';
  return out.str();
}

std::string summary_table(const DifftestResult& r) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-32s %-6s %-6s %-6s %10s\n", "program", "weak", "modes", "golden",
                "overhead");
  out << buf;
  for (const auto& p : r.pairs) {
    if (p.kind == EntryKind::Divergence) {
      std::snprintf(buf, sizeof buf, "%-32s %-6s %s\n", p.id.c_str(), p.ok() ? "DIVRG" : "FAIL",
                    p.rejected_by_check ? "(rejected by check, runs unchecked)" : "(not rejected)");
    } else if (!p.valid) {
      std::snprintf(buf, sizeof buf, "%-32s %-6s %s\n", p.id.c_str(), "INVAL", p.invalid_reason.c_str());
    } else {
      std::string modes = p.modes_agree ? (*p.modes_agree ? "same" : "DIFF") : "-";
      std::string golden = p.golden_ok ? (*p.golden_ok ? "ok" : "DIFF") : "-";
      std::snprintf(buf, sizeof buf, "%-32s %-6s %-6s %-6s %9sx\n", p.id.c_str(),
                    p.weak.pass ? "PASS" : "FAIL", modes.c_str(), golden.c_str(),
                    fmt2(p.strong.overhead_reductions).c_str());
    }
    out << buf;
  }
  out << '\n';
  for (const auto& row : r.checklist.rows)
    out << row.table << "  " << row_status_name(row.status) << "  " << row.label << "  (" << row.evidence
        << ")\n";
  for (const auto& pr : r.problems) out << "problem: " << pr << '\n';
  return out.str();
}

ChecklistReport parse_checklist(std::string_view text) {
  ChecklistReport c;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("ROW ", 0) != 0) continue;
    std::string_view rest(line);
    rest.remove_prefix(4);
    auto bad = [&] { throw std::invalid_argument("malformed checklist line: " + line); };
    ChecklistRow r;
    auto sp = rest.find(' ');
    if (sp == std::string_view::npos) bad();
    r.table = std::string(rest.substr(0, sp));
    rest.remove_prefix(sp + 1);
    sp = rest.find(' ');
    if (sp == std::string_view::npos) bad();
    auto status = rest.substr(0, sp);
    bool found = false;
    for (auto s : {RowStatus::Pass, RowStatus::Gap, RowStatus::OutOfScope, RowStatus::NotDemonstrated})
      if (row_status_name(s) == status) {
        r.status = s;
        found = true;
      }
    if (!found) bad();
    rest.remove_prefix(sp + 1);
    auto [label, tail] = split_two_values(rest);
    if (label.size() < 2) bad();
    r.label = label.substr(1, label.size() - 2);
    auto open = tail.find("tests=[");
    auto close = tail.find(']');
    if (open == std::string::npos || close == std::string::npos) bad();
    std::stringstream ts(tail.substr(open + 7, close - open - 7));
    for (std::string id; std::getline(ts, id, ',');)
      if (!trim(id).empty()) r.tests.push_back(trim(id));
    auto ev = tail.find("evidence=");
    if (ev == std::string::npos) bad();
    std::string q = tail.substr(ev + 9);
    if (q.size() < 2) bad();
    r.evidence = q.substr(1, q.size() - 2);
    c.rows.push_back(std::move(r));
  }
  return c;
}

}  // namespace gl
