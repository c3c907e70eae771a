#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "gl/vm.hpp"

namespace recv_oracle {

struct PatternCase {
  const char* source;
  std::function<bool(const gl::Value&)> matches;
};

inline const std::vector<gl::Value>& universe() {
  static const std::vector<gl::Value> u = [] {
    gl::Value one[] = {gl::Value::integer(1)};
    return std::vector<gl::Value>{
        gl::Value::integer(1), gl::Value::integer(2), gl::Value::str("a"),
        gl::Value::tuple({gl::Value::integer(1), gl::Value::integer(2)}), gl::Value::list(one)};
  }();
  return u;
}

inline const std::vector<PatternCase>& patterns() {
  using gl::Tag;
  static const std::vector<PatternCase> p = {
      {"1", [](const gl::Value& v) { return v.is(Tag::Int) && v.as_int() == 1; }},
      {"\"a\"", [](const gl::Value& v) { return v.is(Tag::Str) && v.as_str() == "a"; }},
      {"(_, 2)",
       [](const gl::Value& v) {
         return v.is(Tag::Tuple) && v.items().size() == 2 && v.items()[1].is(Tag::Int) &&
                v.items()[1].as_int() == 2;
       }},
      {"n if n == 2", [](const gl::Value& v) { return v.is(Tag::Int) && v.as_int() == 2; }},
      {"_ :: _", [](const gl::Value& v) { return v.is_cons(); }},
      {"_", [](const gl::Value&) { return true; }},
  };
  return p;
}

struct Expected {
  bool deadlock = true;
  int arm = -1;
  std::vector<gl::Value> rest;
};

// First message in mailbox order that matches any arm; arms tried in order.
inline Expected expected(const std::vector<int>& arms, const std::vector<gl::Value>& mailbox) {
  Expected e;
  for (std::size_t i = 0; i < mailbox.size(); ++i)
    for (int a = 0; a < static_cast<int>(arms.size()); ++a)
      if (patterns()[arms[a]].matches(mailbox[i])) {
        e.deadlock = false;
        e.arm = a;
        e.rest = mailbox;
        e.rest.erase(e.rest.begin() + static_cast<long>(i));
        return e;
      }
  e.rest = mailbox;
  return e;
}

inline std::string program(const std::vector<int>& arms) {
  std::string s = "fn main() = receive { ";
  for (std::size_t a = 0; a < arms.size(); ++a) {
    if (a) s += ", ";
    s += patterns()[arms[a]].source;
    s += " -> " + std::to_string(a);
  }
  return s + " }";
}

struct Result {
  long cases = 0;
  std::vector<std::string> failures;
  double seconds = 0;
};

template <class F>
void for_each_seq(int max_len, int base, F f) {
  std::vector<int> seq;
  std::function<void()> go = [&] {
    f(seq);
    if (static_cast<int>(seq.size()) == max_len) return;
    for (int k = 0; k < base; ++k) {
      seq.push_back(k);
      go();
      seq.pop_back();
    }
  };
  go();
}

/// Runs every arm list of length 1..3 against every mailbox of length 0..4.
inline Result check_all(gl::Mode mode) {
  auto t0 = std::chrono::steady_clock::now();
  Result res;
  int np = static_cast<int>(patterns().size());
  int nu = static_cast<int>(universe().size());
  for_each_seq(3, np, [&](const std::vector<int>& arms) {
    if (arms.empty()) return;
    auto src = program(arms);
    auto prog = std::make_shared<gl::Program>(gl::parse_source(src));
    if (!gl::check(*prog).empty()) {
      res.failures.push_back("check failed: " + src);
      return;
    }
    auto mod = std::make_shared<const gl::Module>(gl::compile(*prog));
    for_each_seq(4, nu, [&](const std::vector<int>& idx) {
      std::vector<gl::Value> mb;
      for (int k : idx) mb.push_back(universe()[k]);
      gl::RunOptions o;
      o.mode = mode;
      o.main_mailbox = mb;
      auto r = mode == gl::Mode::Bytecode ? gl::run_module(mod, o) : gl::run_program(prog, o);
      auto want = expected(arms, mb);
      ++res.cases;
      bool ok = want.deadlock ? r.outcome == gl::OutcomeKind::Deadlock
                              : r.outcome == gl::OutcomeKind::Value &&
                                    r.outcome_value == std::to_string(want.arm);
      if (ok) {
        ok = r.final_main_mailbox.size() == want.rest.size();
        for (std::size_t i = 0; ok && i < want.rest.size(); ++i)
          ok = gl::value_equal(r.final_main_mailbox[i], want.rest[i]);
      }
      if (!ok && res.failures.size() < 20) {
        std::string m;
        for (const auto& v : mb) m += gl::format_value(v) + " ";
        res.failures.push_back(src + " | mailbox " + m + "| got " + gl::serialize_report(r, false));
      }
    });
  });
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace recv_oracle
