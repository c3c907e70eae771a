#include <charconv>
#include <sstream>
#include <stdexcept>

#include "gl/report.hpp"

namespace gl {

std::string_view outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Value: return "value";
    case OutcomeKind::Crash: return "crash";
    case OutcomeKind::Deadlock: return "deadlock";
    case OutcomeKind::FuelExhausted: return "fuel_exhausted";
  }
  return "value";
}

std::string serialize_report(const RunReport& r, bool include_host) {
  std::ostringstream out;
  if (include_host) out << "MODE " << r.mode << '\n';
  out << "OUTCOME " << outcome_name(r.outcome);
  if (r.outcome != OutcomeKind::FuelExhausted) out << ' ' << r.outcome_value;
  if (r.outcome == OutcomeKind::Crash) out << ' ' << r.outcome_trace;
  out << '\n';
  for (const auto& p : r.prints) out << "PRINT " << p.pid << ' ' << quote_string(p.text) << '\n';
  for (const auto& c : r.crashes) out << "CRASH " << c.pid << ' ' << c.exc << ' ' << c.trace << '\n';
  for (const auto& m : r.meters)
    out << "METER pid=" << m.pid << " red=" << m.reductions << " alloc=" << m.alloc << '\n';
  if (include_host)
    out << "HOST instr=" << r.host.instructions << " red=" << r.host.reductions
        << " alloc=" << r.host.alloc << '\n';
  return out.str();
}

namespace {

[[noreturn]] void bad(std::string_view line) {
  throw std::invalid_argument("malformed report line: " + std::string(line));
}

// Index one past the end of the canonical value starting at pos.
std::size_t value_end(std::string_view s, std::size_t pos) {
  int depth = 0;
  bool in_str = false;
  for (std::size_t i = pos; i < s.size(); ++i) {
    char c = s[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
      continue;
    }
    switch (c) {
      case '"': in_str = true; break;
      case '(': case '[': case '<': ++depth; break;
      case ')': case ']': case '>': --depth; break;
      case ' ':
        if (depth == 0) return i;
        break;
      default: break;
    }
  }
  return s.size();
}

std::string unquote(std::string_view s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') bad(s);
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    char n = s[++i];
    out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
  }
  return out;
}

std::int64_t to_int(std::string_view s, std::string_view line) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad(line);
  return v;
}

// Reads "key=N" and advances.
std::int64_t field(std::string_view& rest, std::string_view key, std::string_view line) {
  if (rest.substr(0, key.size()) != key || rest.size() <= key.size() || rest[key.size()] != '=')
    bad(line);
  rest.remove_prefix(key.size() + 1);
  auto sp = rest.find(' ');
  auto v = to_int(rest.substr(0, sp), line);
  rest = sp == std::string_view::npos ? std::string_view() : rest.substr(sp + 1);
  return v;
}

}  // namespace

std::pair<std::string, std::string> split_two_values(std::string_view text) {
  auto e = value_end(text, 0);
  if (e >= text.size()) throw std::invalid_argument("expected two values: " + std::string(text));
  return {std::string(text.substr(0, e)), std::string(text.substr(e + 1))};
}

RunReport parse_report(std::string_view text) {
  RunReport r;
  bool have_outcome = false;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    if (line.empty()) continue;
    auto sp = line.find(' ');
    std::string_view kw = line.substr(0, sp);
    std::string_view rest = sp == std::string_view::npos ? std::string_view() : line.substr(sp + 1);
    if (kw == "MODE") {
      r.mode = std::string(rest);
    } else if (kw == "OUTCOME") {
      have_outcome = true;
      auto sp2 = rest.find(' ');
      std::string_view kind = rest.substr(0, sp2);
      std::string_view arg = sp2 == std::string_view::npos ? std::string_view() : rest.substr(sp2 + 1);
      if (kind == "value") {
        r.outcome = OutcomeKind::Value;
        r.outcome_value = std::string(arg);
      } else if (kind == "crash") {
        r.outcome = OutcomeKind::Crash;
        std::tie(r.outcome_value, r.outcome_trace) = split_two_values(arg);
      } else if (kind == "deadlock") {
        r.outcome = OutcomeKind::Deadlock;
        r.outcome_value = std::string(arg);
      } else if (kind == "fuel_exhausted") {
        r.outcome = OutcomeKind::FuelExhausted;
      } else {
        bad(line);
      }
    } else if (kw == "PRINT") {
      auto sp2 = rest.find(' ');
      if (sp2 == std::string_view::npos) bad(line);
      r.prints.push_back({to_int(rest.substr(0, sp2), line), unquote(rest.substr(sp2 + 1))});
    } else if (kw == "CRASH") {
      auto sp2 = rest.find(' ');
      if (sp2 == std::string_view::npos) bad(line);
      CrashEntry c;
      c.pid = to_int(rest.substr(0, sp2), line);
      std::tie(c.exc, c.trace) = split_two_values(rest.substr(sp2 + 1));
      r.crashes.push_back(std::move(c));
    } else if (kw == "METER") {
      PidMeter m;
      m.pid = field(rest, "pid", line);
      m.reductions = field(rest, "red", line);
      m.alloc = field(rest, "alloc", line);
      r.meters.push_back(m);
    } else if (kw == "HOST") {
      r.host.instructions = field(rest, "instr", line);
      r.host.reductions = field(rest, "red", line);
      r.host.alloc = field(rest, "alloc", line);
    } else {
      bad(line);
    }
  }
  if (!have_outcome) throw std::invalid_argument("report has no OUTCOME line");
  return r;
}

}  // namespace gl
