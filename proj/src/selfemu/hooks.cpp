#include <algorithm>

#include "gl/selfemu.hpp"

namespace gl {

const std::vector<std::string>& hook_names() {
  static const std::vector<std::string> names = {"clock", "mem", "stacktrace", "fun_id",
                                                 "sys_info"};
  return names;
}

namespace {

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

}  // namespace

// Line numbers are preserved: dropped lines become blank.
std::string strip_hooks(std::string_view source, const std::set<std::string>& disabled) {
  const auto& known = hook_names();
  for (const auto& d : disabled)
    if (std::find(known.begin(), known.end(), d) == known.end())
      throw std::invalid_argument("unknown hook: " + d);

  enum { Outside, Hooked, Alternative } state = Outside;
  bool off = false;
  int lineno = 0;
  std::string out;
  out.reserve(source.size());
  while (!source.empty()) {
    auto nl = source.find('\n');
    std::string_view line = source.substr(0, nl);
    source = nl == std::string_view::npos ? std::string_view() : source.substr(nl + 1);
    ++lineno;
    auto fail = [&](const char* what) {
      throw std::invalid_argument("hook markers, line " + std::to_string(lineno) + ": " + what);
    };
    if (starts_with(line, "#@hook ")) {
      if (state != Outside) fail("nested hook");
      std::string name(line.substr(7));
      if (std::find(known.begin(), known.end(), name) == known.end()) fail("unknown hook name");
      off = disabled.count(name) > 0;
      state = Hooked;
      out += '\n';
      continue;
    }
    if (line == "#@else") {
      if (state != Hooked) fail("stray #@else");
      state = Alternative;
      out += '\n';
      continue;
    }
    if (line == "#@end") {
      if (state == Outside) fail("stray #@end");
      state = Outside;
      out += '\n';
      continue;
    }
    if (state == Hooked && off) {
      out += '\n';
      continue;
    }
    if (state == Alternative && off) {
      if (!starts_with(line, "#|")) fail("alternative line without #|");
      line.remove_prefix(2);
      if (starts_with(line, " ")) line.remove_prefix(1);
    }
    out += line;
    out += '\n';
  }
  if (state != Outside) throw std::invalid_argument("hook markers: unterminated block");
  return out;
}

}  // namespace gl
