#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gl/module.hpp"
#include "gl/report.hpp"
#include "gl/vm.hpp"

namespace gl {

/// Names of the emulator's virtualisation hooks.
const std::vector<std::string>& hook_names();

/// Rewrites hook blocks of emulator source. Blocks named in `disabled` use
/// their unhooked alternative. Throws std::invalid_argument on unknown names
/// or unbalanced markers.
std::string strip_hooks(std::string_view source, const std::set<std::string>& disabled);

/// Emulator source with all hooks active (the asset as written).
std::string_view selfemu_raw_source();

/// Emulator source with the given hooks disabled.
std::string selfemu_source(const std::set<std::string>& disabled = {});

/// The emulator asset failed to parse, check or compile.
class AssetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmuOptions {
  std::set<std::string> disabled_hooks;
  bool debug = false;             // report the emulator's host stack depth
  std::optional<std::int64_t> fuel;  // host reductions
};

/// Complete program that runs `m` under the emulator.
std::string wrapper_source(const Module& m, const EmuOptions& opts);

/// Result of running a program under the emulator.
struct EmuRun {
  RunReport report;          // projected guest observables, host meters in report.host
  RunReport host;            // raw host report of the emulator run
  bool emulator_failed = false;  // host run did not end with a well-formed footer
  std::optional<std::int64_t> host_depth;  // debug mode only
};

/// Rebuilds guest observables from the host print trace of an emulator run.
EmuRun project(const RunReport& host);

/// Compiles the emulator and runs `m` under it on the bytecode VM.
/// Throws AssetError if the emulator asset does not compile.
EmuRun run_emulated(const Module& m, const EmuOptions& opts = {});

}  // namespace gl
