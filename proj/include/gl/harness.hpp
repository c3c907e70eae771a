#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gl/module.hpp"
#include "gl/report.hpp"

namespace gl {

enum class EntryKind { Program, Probe, Divergence };

struct CorpusEntry {
  std::string id;  // path relative to the corpus root, without ".gl"
  EntryKind kind = EntryKind::Program;
  std::string source;
  std::optional<std::int64_t> fuel;   // from a "# fuel: N" line
  std::optional<std::string> golden;  // contents of the .expect file
};

/// Loads corpus/*.gl, corpus/probes/*.gl and corpus/divergence/*.gl sorted by id.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

struct HarnessOptions {
  std::set<std::string> sabotage;  // emulator hooks to disable
  std::int64_t fuel_scale = 1000;  // emulated fuel = direct fuel * fuel_scale
  int jobs = 0;                    // 0 picks the hardware concurrency
};

struct Diff {
  std::string field;
  std::string direct;
  std::string emulated;
};

struct WeakVerdict {
  bool pass = true;
  std::vector<Diff> diffs;  // first divergence only
};

struct StrongVerdict {
  bool distinguishable = false;
  double overhead_reductions = 0;
  double overhead_alloc = 0;
};

struct PairReport {
  std::string id;
  EntryKind kind = EntryKind::Program;
  bool valid = true;
  std::string invalid_reason;
  RunReport direct;
  RunReport emulated;
  WeakVerdict weak;
  StrongVerdict strong;
  std::vector<std::string> probe_reads;  // introspection builtins the program calls
  std::optional<bool> modes_agree;       // ast vs bytecode
  std::string mode_diff;
  std::optional<bool> golden_ok;
  bool fuel_prefix = false;              // compared as prefixes under fuel
  // divergence programs
  bool rejected_by_check = false;
  std::string check_error;
  std::optional<RunReport> unchecked;
  std::array<std::int64_t, kOpCount> op_counts{};

  bool ok() const;
};

WeakVerdict compare_weak(const RunReport& direct, const RunReport& emulated);

/// Weak comparison for runs cut short by fuel: the direct print and crash
/// traces must be prefixes of the emulated ones.
WeakVerdict compare_prefix(const RunReport& direct, const RunReport& emulated);

StrongVerdict compare_strong(const RunReport& direct, const RunReport& emulated);

PairReport run_pair(const CorpusEntry& entry, const HarnessOptions& opts);

enum class RowStatus { Pass, Gap, OutOfScope, NotDemonstrated };

std::string_view row_status_name(RowStatus s);

struct ChecklistRow {
  std::string table;  // "T3" or "T4"
  std::string label;
  std::string expect;  // pass | gap | out-of-scope
  std::string reason;  // out-of-scope only
  std::vector<std::string> tests;
  RowStatus status = RowStatus::NotDemonstrated;
  std::string evidence;
};

struct ChecklistReport {
  std::vector<ChecklistRow> rows;
};

class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the checklist map. Line format: TABLE | label | expectation | ids.
std::vector<ChecklistRow> load_checklist_map(const std::filesystem::path& file);

/// Fills in row statuses. Throws CoverageError when a row names a test that
/// was not run.
ChecklistReport checklist_report(const std::vector<PairReport>& pairs,
                                 std::vector<ChecklistRow> rows);

struct DifftestResult {
  std::vector<PairReport> pairs;
  ChecklistReport checklist;
  std::array<std::int64_t, kOpCount> coverage{};
  std::vector<std::string> problems;
  int exit_code = 0;  // 0 ok, 6 check failure, 7 coverage guard
};

/// Runs every corpus entry, checks coverage and builds the checklist.
DifftestResult difftest(const std::filesystem::path& corpus_dir, const HarnessOptions& opts);

std::string serialize_pair(const PairReport& p);
std::string serialize_checklist(const ChecklistReport& c);
std::string serialize_difftest(const DifftestResult& r);
std::string summary_table(const DifftestResult& r);

/// Reads back the ROW lines of a serialized checklist. Throws
/// std::invalid_argument on malformed input.
ChecklistReport parse_checklist(std::string_view text);

}  // namespace gl
