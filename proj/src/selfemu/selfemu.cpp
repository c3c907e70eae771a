#include <charconv>
#include <cstring>

#include "gl/frontend.hpp"
#include "gl/selfemu.hpp"

namespace gl {

namespace assets {
struct Variant {
  const char* hook;
  const char* source;
};
extern const char* const kSelfemuRaw;
extern const Variant kSelfemuVariants[];
extern const std::size_t kSelfemuVariantCount;
}  // namespace assets

std::string_view selfemu_raw_source() { return assets::kSelfemuRaw; }

std::string selfemu_source(const std::set<std::string>& disabled) {
  if (disabled.empty()) return assets::kSelfemuRaw;
  if (disabled.size() == 1)
    for (std::size_t i = 0; i < assets::kSelfemuVariantCount; ++i)
      if (*disabled.begin() == assets::kSelfemuVariants[i].hook) return assets::kSelfemuVariants[i].source;
  return strip_hooks(assets::kSelfemuRaw, disabled);
}

std::string wrapper_source(const Module& m, const EmuOptions& opts) {
  std::string src = selfemu_source(opts.disabled_hooks);
  src += "\nfn main() = ";
  src += opts.debug ? "emu_main_debug(" : "emu_main(";
  src += value_to_source(reify(m));
  src += ")\n";
  return src;
}

namespace {

bool take_prefix(std::string_view& s, std::string_view p) {
  if (s.substr(0, p.size()) != p) return false;
  s.remove_prefix(p.size());
  return true;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

EmuRun project(const RunReport& host) {
  EmuRun e;
  e.host = host;
  std::string footer;
  std::vector<PrintEntry> prints;
  std::int64_t from = -1;  // pid of the pending print, or -1
  bool have_outcome = false;
  bool stray = false;
  for (const auto& p : host.prints) {
    if (from >= 0) {
      prints.push_back({from, p.text});
      from = -1;
      continue;
    }
    std::string_view t = p.text;
    if (take_prefix(t, "#emu:from ")) {
      auto pid = parse_int(t);
      if (pid && *pid >= 0) from = *pid;
      else stray = true;
    } else if (take_prefix(t, "#emu:HOSTDEPTH ")) {
      e.host_depth = parse_int(t);
    } else if (take_prefix(t, "#emu:")) {
      if (t.substr(0, 8) == "OUTCOME ") have_outcome = true;
      footer.append(t);
      footer += '\n';
    } else {
      stray = true;
    }
  }
  if (!have_outcome) footer += "OUTCOME fuel_exhausted\n";

  RunReport r;
  try {
    r = parse_report(footer);
  } catch (const std::invalid_argument&) {
    stray = true;
  }
  r.mode = "selfemu";
  r.prints = std::move(prints);
  r.host = host.host;

  bool fuel_out = host.outcome == OutcomeKind::FuelExhausted;
  if (!fuel_out && (!have_outcome || host.outcome != OutcomeKind::Value)) stray = true;
  if (fuel_out) {
    r.outcome = OutcomeKind::FuelExhausted;
    r.outcome_value.clear();
    r.outcome_trace.clear();
  }
  if (stray) {
    e.emulator_failed = true;
    if (!fuel_out) {
      r.outcome = host.outcome;
      r.outcome_value = host.outcome_value;
      r.outcome_trace = host.outcome_trace;
    }
  }
  e.report = std::move(r);
  return e;
}

EmuRun run_emulated(const Module& m, const EmuOptions& opts) {
  std::shared_ptr<const Module> wrapper;
  try {
    Program prog = parse_source(wrapper_source(m, opts));
    auto errs = check(prog);
    if (!errs.empty())
      throw AssetError("emulator asset: line " + std::to_string(errs.front().line) + ": " +
                       errs.front().message);
    wrapper = std::make_shared<const Module>(compile(prog));
  } catch (const SourceError& err) {
    throw AssetError(std::string("emulator asset: ") + err.what());
  }
  RunOptions ro;
  ro.mode = Mode::Bytecode;
  ro.fuel = opts.fuel;
  return project(run_module(wrapper, ro));
}

}  // namespace gl
