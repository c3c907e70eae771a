#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gl/module.hpp"
#include "gl/value.hpp"

namespace gl {

enum class OutcomeKind { Value, Crash, Deadlock, FuelExhausted };

std::string_view outcome_name(OutcomeKind k);

struct PrintEntry {
  std::int64_t pid = 0;
  std::string text;
};

struct CrashEntry {
  std::int64_t pid = 0;
  std::string exc;    // canonical rendering
  std::string trace;  // canonical rendering of the guest trace list
};

struct PidMeter {
  std::int64_t pid = 0;
  std::int64_t reductions = 0;
  std::int64_t alloc = 0;
};

/// Deterministic host-level counters. Never part of the weak observable set.
struct HostMeters {
  std::int64_t instructions = 0;
  std::int64_t reductions = 0;
  std::int64_t alloc = 0;
};

struct AuditLog {
  std::array<std::int64_t, kOpCount> op_counts{};
  struct Charge {
    std::int64_t pid;
    std::int64_t units;
    std::string what;
  };
  std::vector<Charge> charges;
};

/// Observables of one run. Values are held in canonical text so that reports
/// produced by direct runs, by the self-emulator footer and by parsing compare
/// uniformly.
struct RunReport {
  std::string mode;
  OutcomeKind outcome = OutcomeKind::Value;
  std::string outcome_value;  // value, exception, or deadlocked pid list
  std::string outcome_trace;  // crash only
  std::vector<PrintEntry> prints;
  std::vector<CrashEntry> crashes;
  std::vector<PidMeter> meters;
  HostMeters host;

  // Direct runs only; not serialized.
  std::optional<Value> value;
  std::optional<AuditLog> audit;
  std::vector<Value> final_main_mailbox;

  std::int64_t main_reductions() const;
  std::int64_t main_alloc() const;
};

std::string serialize_report(const RunReport& r, bool include_host = true);

/// Inverse of serialize_report. Throws std::invalid_argument on malformed input.
RunReport parse_report(std::string_view text);

/// Splits canonical text holding two adjacent values ("a b") at the boundary.
std::pair<std::string, std::string> split_two_values(std::string_view text);

}  // namespace gl
