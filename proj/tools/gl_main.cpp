#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gl/frontend.hpp"
#include "gl/harness.hpp"
#include "gl/selfemu.hpp"
#include "gl/vm.hpp"

namespace {

enum Exit { kValue = 0, kCrash = 1, kDeadlock = 2, kFuel = 3, kFrontEnd = 4, kAsset = 5 };

struct Config {
  std::string input;
  std::string mode = "bytecode";
  std::optional<std::int64_t> fuel;
  std::vector<std::string> sabotage;
  std::string out;
  bool audit = false;
  bool reify = false;
  int jobs = 0;
};

struct FrontEndFailure {
  std::string message;
};

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FrontEndFailure{path + ": cannot read file"};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

gl::Program load_checked(const std::string& path, bool run_checker = true) {
  auto src = read_input(path);
  try {
    gl::Program p = gl::parse_source(src);
    if (run_checker) {
      auto errs = gl::check(p);
      if (!errs.empty()) {
        std::string msg;
        for (const auto& e : errs) msg += path + ": " + e.to_string() + "\n";
        msg.pop_back();
        throw FrontEndFailure{msg};
      }
    }
    return p;
  } catch (const gl::SourceError& e) {
    throw FrontEndFailure{path + ": " + e.what()};
  }
}

void emit(const Config& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream o(cfg.out, std::ios::binary);
  o << text;
  if (!o) throw std::runtime_error("cannot write " + cfg.out);
}

int exit_for(gl::OutcomeKind k) {
  switch (k) {
    case gl::OutcomeKind::Value: return kValue;
    case gl::OutcomeKind::Crash: return kCrash;
    case gl::OutcomeKind::Deadlock: return kDeadlock;
    case gl::OutcomeKind::FuelExhausted: return kFuel;
  }
  return kCrash;
}

std::string audit_text(const gl::AuditLog& a) {
  std::ostringstream out;
  for (std::size_t k = 0; k < gl::kOpCount; ++k)
    if (a.op_counts[k]) out << "AUDIT op " << gl::op_name(static_cast<gl::Op>(k)) << ' ' << a.op_counts[k] << '\n';
  for (const auto& c : a.charges) out << "AUDIT charge pid=" << c.pid << ' ' << c.units << ' ' << c.what << '\n';
  return out.str();
}

int cmd_run(const Config& cfg) {
  auto mode = gl::mode_from_name(cfg.mode);
  if (!mode) throw CLI::ValidationError("--mode", "expected bytecode, ast or ast-unchecked");
  gl::RunOptions ro;
  ro.mode = *mode;
  ro.fuel = cfg.fuel;
  ro.audit = cfg.audit;
  gl::RunReport r;
  try {
    r = gl::run_source(read_input(cfg.input), ro);
  } catch (const gl::SourceError& e) {
    throw FrontEndFailure{cfg.input + ": " + e.what()};
  } catch (const gl::CheckFailed& e) {
    std::string msg;
    for (const auto& err : e.errors()) msg += cfg.input + ": " + err.to_string() + "\n";
    msg.pop_back();
    throw FrontEndFailure{msg};
  }
  emit(cfg, gl::serialize_report(r));
  if (cfg.audit && r.audit) std::cerr << audit_text(*r.audit);
  return exit_for(r.outcome);
}

int cmd_emulate(const Config& cfg) {
  auto prog = load_checked(cfg.input);
  auto m = gl::compile(prog);
  gl::EmuOptions eo;
  eo.disabled_hooks = {cfg.sabotage.begin(), cfg.sabotage.end()};
  eo.fuel = cfg.fuel;
  gl::EmuRun run;
  try {
    run = gl::run_emulated(m, eo);
  } catch (const gl::AssetError& e) {
    std::cerr << e.what() << '\n';
    return kAsset;
  }
  if (run.emulator_failed && run.report.outcome != gl::OutcomeKind::FuelExhausted)
    std::cerr << "emulator run ended without a footer:\n" << gl::serialize_report(run.host);
  emit(cfg, gl::serialize_report(run.report));
  return exit_for(run.report.outcome);
}

int cmd_compile(const Config& cfg) {
  auto m = gl::compile(load_checked(cfg.input));
  if (cfg.reify) emit(cfg, gl::format_value(gl::reify(m)) + "\n");
  else emit(cfg, gl::wrapper_source(m, {}));
  return 0;
}

int cmd_disas(const Config& cfg) {
  emit(cfg, gl::disassemble(gl::compile(load_checked(cfg.input))) + "\n");
  return 0;
}

int cmd_difftest(const Config& cfg) {
  gl::HarnessOptions ho;
  ho.sabotage = {cfg.sabotage.begin(), cfg.sabotage.end()};
  ho.jobs = cfg.jobs;
  auto res = gl::difftest(cfg.input, ho);
  if (!cfg.out.empty()) {
    std::ofstream o(cfg.out, std::ios::binary);
    o << gl::serialize_difftest(res);
    if (!o) throw std::runtime_error("cannot write " + cfg.out);
  }
  std::cout << gl::summary_table(res);
  if (cfg.audit) {
    std::cout << "\ncoverage:";
    for (std::size_t k = 0; k < gl::kOpCount; ++k)
      std::cout << ' ' << gl::op_name(static_cast<gl::Op>(k)) << '=' << res.coverage[k];
    std::cout << '\n';
  }
  return res.exit_code;
}

int cmd_report(const Config& cfg) {
  auto c = gl::parse_checklist(read_input(cfg.input));
  if (c.rows.empty()) throw FrontEndFailure{cfg.input + ": no checklist rows"};
  std::ostringstream out;
  for (const auto& r : c.rows)
    out << r.table << "  " << gl::row_status_name(r.status) << "  " << r.label << "  (" << r.evidence << ")\n";
  emit(cfg, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gl toolchain, self-emulator and differential harness"};
  app.require_subcommand(1);
  Config cfg;

  if (const char* env = std::getenv("GL_FUEL")) {
    try {
      cfg.fuel = std::stoll(env);
    } catch (const std::exception&) {
      std::cerr << "GL_FUEL: not a number: " << env << '\n';
      return 4;
    }
  }

  auto add_fuel = [&](CLI::App* sub) {
    sub->add_option("--fuel", cfg.fuel, "cap on total reductions (default: GL_FUEL)")->check(CLI::PositiveNumber);
  };
  auto add_sabotage = [&](CLI::App* sub) {
    sub->add_option("--sabotage", cfg.sabotage, "emulator hooks to disable")
        ->delimiter(',')
        ->check(CLI::IsMember(gl::hook_names()));
  };

  auto* run = app.add_subcommand("run", "run a program and print its report");
  run->add_option("file", cfg.input)->required();
  run->add_option("--mode", cfg.mode, "bytecode, ast or ast-unchecked")
      ->check(CLI::IsMember({"bytecode", "ast", "ast-unchecked"}));
  add_fuel(run);
  run->add_flag("--audit", cfg.audit, "print instruction and charge audit to stderr");
  run->add_option("--out", cfg.out, "write the report here");

  auto* emulate = app.add_subcommand("emulate", "run a program under the self-emulator");
  emulate->add_option("file", cfg.input)->required();
  add_fuel(emulate);
  add_sabotage(emulate);
  emulate->add_option("--out", cfg.out, "write the report here");

  auto* compile = app.add_subcommand("compile", "print the emulator wrapper program");
  compile->add_option("file", cfg.input)->required();
  compile->add_flag("--reify", cfg.reify, "print the reified module instead");
  compile->add_option("--out", cfg.out, "write the output here");

  auto* disas = app.add_subcommand("disas", "print the bytecode listing");
  disas->add_option("file", cfg.input)->required();
  disas->add_option("--out", cfg.out, "write the listing here");

  auto* difftest = app.add_subcommand("difftest", "compare direct and emulated runs over a corpus");
  difftest->add_option("dir", cfg.input, "corpus directory")->required();
  add_sabotage(difftest);
  difftest->add_flag("--audit", cfg.audit, "print opcode coverage counts");
  difftest->add_option("--out", cfg.out, "write the full serialized report here");
  difftest->add_option("--jobs", cfg.jobs, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

  auto* report = app.add_subcommand("report", "summarise a saved difftest report");
  report->add_option("file", cfg.input)->required();
  report->add_option("--out", cfg.out, "write the summary here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kFrontEnd;
  }

  try {
    if (run->parsed()) return cmd_run(cfg);
    if (emulate->parsed()) return cmd_emulate(cfg);
    if (compile->parsed()) return cmd_compile(cfg);
    if (disas->parsed()) return cmd_disas(cfg);
    if (difftest->parsed()) return cmd_difftest(cfg);
    if (report->parsed()) return cmd_report(cfg);
  } catch (const FrontEndFailure& f) {
    std::cerr << f.message << '\n';
    return kFrontEnd;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kFrontEnd;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFrontEnd;
  }
  return 0;
}
