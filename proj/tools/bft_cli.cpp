// bft — toolkit for the dbfi-BF language: run programs directly or through
// an optimizing bytecode engine, stack them under copies of the dbfi
// self-interpreter, audit the interpreter's memory layout, and fuzz the
// engines against each other.
//
// Exit codes: 0 success, 1 parse error, 2 engine fault (underflow, layout
// disagreement), 3 budget exhausted (step or tape).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "bft/bytecode.hpp"
#include "bft/conformance.hpp"
#include "bft/tower.hpp"

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_stdout(const std::string& bytes) {
  std::fwrite(bytes.data(), 1, bytes.size(), stdout);
  std::fflush(stdout);
}

int exit_for(bft::HaltReason r, const std::string& what) {
  switch (r) {
    case bft::HaltReason::Completed:
      return 0;
    case bft::HaltReason::Underflow:
      std::cerr << "bft: " << what << ": head moved left of cell zero\n";
      return 2;
    case bft::HaltReason::StepLimit:
      std::cerr << "bft: " << what << ": step budget exhausted\n";
      return 3;
    case bft::HaltReason::TapeLimit:
      std::cerr << "bft: " << what << ": tape budget exhausted\n";
      return 3;
  }
  return 2;
}

struct EngineFlags {
  std::string profile = "portable";
  int cell_width = 8;
  std::optional<std::uint64_t> step_limit;
  std::optional<std::uint64_t> tape_limit;
  std::uint64_t default_step_limit;

  explicit EngineFlags(std::uint64_t default_steps)
      : default_step_limit(default_steps) {}

  void attach(CLI::App* cmd) {
    cmd->add_option("--profile", profile,
                    "tape profile: portable (strict) or sparse")
        ->check(CLI::IsMember({"portable", "sparse"}));
    cmd->add_option("--cell-width", cell_width, "cell width in bits")
        ->check(CLI::IsMember({8, 16, 32}));
    cmd->add_option("--step-limit", step_limit,
                    "step budget (default " +
                        std::to_string(default_step_limit) + ")");
    cmd->add_option("--tape-limit", tape_limit, "max cells ever visited");
  }

  bft::EngineConfig config() const {
    bft::EngineConfig c = profile == "sparse" ? bft::EngineConfig::sparse()
                                              : bft::EngineConfig::portable();
    c.cell_width = cell_width;
    c.step_limit = step_limit ? *step_limit : default_step_limit;
    c.tape_limit = tape_limit;
    return c;
  }
};

bft::ExecutionOutcome run_with(const std::string& engine,
                               const bft::Program& p,
                               std::optional<std::string_view> data,
                               const bft::EngineConfig& cfg) {
  if (engine == "bytecode") return bft::execute(bft::compile(p), data, cfg);
  return bft::run(p, data, cfg);
}

// (code, data) halves of a stream split at its first '!'.
std::pair<std::string, std::string> split_source(const std::string& src) {
  auto pos = src.find('!');
  if (pos == std::string::npos) return {src, ""};
  return {src.substr(0, pos), src.substr(pos + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toolkit for the dbfi-BF language"};
  app.require_subcommand(1);

  // ---- run ----
  auto* cmd_run = app.add_subcommand("run", "run a program");
  std::string run_file;
  std::string run_data_file;
  std::string run_engine = "direct";
  EngineFlags run_flags(1'000'000'000);
  cmd_run->add_option("file", run_file, "program file, or - for stdin")
      ->required();
  cmd_run->add_option("--data-file", run_data_file,
                      "input bytes to use instead of the data segment");
  cmd_run->add_option("--engine", run_engine, "direct or bytecode")
      ->check(CLI::IsMember({"direct", "bytecode"}));
  run_flags.attach(cmd_run);

  // ---- tower ----
  auto* cmd_tower = app.add_subcommand(
      "tower", "run a program under stacked interpreter copies");
  std::string tower_file;
  int tower_levels = 1;
  std::string tower_engine = "bytecode";
  EngineFlags tower_flags(1'000'000'000);
  cmd_tower->add_option("file", tower_file, "program file, or - for stdin")
      ->required();
  cmd_tower->add_option("--levels", tower_levels, "interpreter copies (>= 0)")
      ->check(CLI::NonNegativeNumber);
  cmd_tower->add_option("--engine", tower_engine, "direct or bytecode")
      ->check(CLI::IsMember({"direct", "bytecode"}));
  tower_flags.attach(cmd_tower);

  // ---- layout ----
  auto* cmd_layout = app.add_subcommand(
      "layout", "audit the interpreter's memory image at every fetch");
  std::string layout_file;
  std::string layout_interp_file;
  EngineFlags layout_flags(1'000'000'000);
  cmd_layout->add_option("file", layout_file, "program file, or - for stdin")
      ->required();
  cmd_layout->add_option("--interpreter-file", layout_interp_file,
                         "host on this interpreter source instead of the "
                         "embedded one (testing hook)");
  layout_flags.attach(cmd_layout);

  // ---- fuzz ----
  auto* cmd_fuzz = app.add_subcommand(
      "fuzz", "differential fuzzing across engines and levels");
  bft::FuzzOptions fuzz_opt;
  fuzz_opt.jobs = std::thread::hardware_concurrency();
  fuzz_opt.repro_dir = ".";
  int fuzz_levels = 1;
  cmd_fuzz->add_option("--seed", fuzz_opt.gen.rng_seed, "corpus seed");
  cmd_fuzz->add_option("--cases", fuzz_opt.cases, "cases to run");
  cmd_fuzz->add_option("--max-tokens", fuzz_opt.gen.max_tokens,
                       "program size cap");
  cmd_fuzz->add_option("--max-depth", fuzz_opt.gen.max_depth,
                       "loop nesting cap");
  cmd_fuzz->add_option("--data-min", fuzz_opt.gen.data_min,
                       "min data bytes");
  cmd_fuzz->add_option("--data-max", fuzz_opt.gen.data_max,
                       "max data bytes");
  cmd_fuzz->add_flag("--allow-nul", fuzz_opt.gen.allow_nul,
                     "allow zero bytes in data");
  cmd_fuzz->add_option("--levels", fuzz_levels,
                       "0: engines at level 0 only; 1: also one hosted level")
      ->check(CLI::Range(0, 1));
  cmd_fuzz->add_option("--case-step-limit", fuzz_opt.diff.level0_budget,
                       "per-case level-0 step budget");
  cmd_fuzz->add_option("--overhead", fuzz_opt.diff.level1_overhead,
                       "level-1 budget multiplier");
  cmd_fuzz->add_option("--jobs", fuzz_opt.jobs, "worker threads");
  cmd_fuzz->add_option("--repro-dir", fuzz_opt.repro_dir,
                       "where failing cases are written ('' disables)");

  // ---- encode ----
  auto* cmd_encode = app.add_subcommand(
      "encode", "print a program as interpreter instruction codes");
  std::string encode_file;
  cmd_encode->add_option("file", encode_file, "program file, or - for stdin")
      ->required();

  // ---- compile ----
  auto* cmd_compile = app.add_subcommand("compile", "compile to bytecode");
  std::string compile_file;
  bool compile_disasm = false;
  cmd_compile->add_option("file", compile_file, "program file, or - for stdin")
      ->required();
  cmd_compile->add_flag("--disasm", compile_disasm,
                        "print the ops, one per line");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_run) {
      bft::Program p = bft::parse(read_input(run_file));
      std::optional<std::string> data;
      if (!run_data_file.empty()) data = read_input(run_data_file);
      std::optional<std::string_view> dv;
      if (data) dv = *data;
      auto outcome = run_with(run_engine, p, dv, run_flags.config());
      write_stdout(outcome.output);
      return exit_for(outcome.halt_reason, "run");
    }

    if (*cmd_tower) {
      auto [code, data] = split_source(read_input(tower_file));
      bft::TowerJob job;
      job.program_source = code;
      job.data = data;
      job.levels = tower_levels;
      job.engine = tower_engine == "direct" ? bft::EngineKind::Direct
                                            : bft::EngineKind::Bytecode;
      job.config = tower_flags.config();
      auto outcome = bft::run_tower(job);
      write_stdout(outcome.output);
      return exit_for(outcome.halt_reason, "tower");
    }

    if (*cmd_layout) {
      auto [code, data] = split_source(read_input(layout_file));
      bft::EngineConfig cfg = layout_flags.config();
      std::optional<std::uint64_t> host_limit = cfg.step_limit;
      bft::CosimReport rep;
      if (layout_interp_file.empty()) {
        rep = bft::cosimulate(code, data, cfg, host_limit);
      } else {
        rep = bft::cosimulate_with(read_input(layout_interp_file), code, data,
                                   cfg, host_limit);
      }
      bft::report_to_jsonl(rep, std::cout);
      std::cout.flush();
      switch (rep.status) {
        case bft::CosimStatus::Clean:
          return 0;
        case bft::CosimStatus::PreRunFailed:
        case bft::CosimStatus::HostFailed:
          std::cerr << "bft: layout: " << rep.note << "\n";
          return rep.note.find("step-limit") != std::string::npos ? 3 : 2;
        default:
          std::cerr << "bft: layout: " << rep.note << "\n";
          return 2;
      }
    }

    if (*cmd_fuzz) {
      fuzz_opt.diff.include_level1 = fuzz_levels >= 1;
      if (fuzz_opt.jobs == 0) fuzz_opt.jobs = 1;
      bft::FuzzReport rep = bft::run_fuzz(fuzz_opt);
      bft::report_to_jsonl(rep, std::cout);
      std::cout.flush();
      if (rep.disagreed > 0) {
        std::cerr << "bft: fuzz: " << rep.disagreed
                  << " case(s) disagreed\n";
        return 2;
      }
      return 0;
    }

    if (*cmd_encode) {
      bft::Program p = bft::parse(read_input(encode_file));
      std::string out;
      for (std::size_t i = 0; i < p.tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += std::to_string(bft::instruction_code(p.tokens[i]));
      }
      out.push_back('\n');
      write_stdout(out);
      return 0;
    }

    if (*cmd_compile) {
      bft::Bytecode bc = bft::compile(bft::parse(read_input(compile_file)));
      if (compile_disasm) {
        write_stdout(bft::disassemble(bc));
      } else {
        write_stdout(std::to_string(bc.ops.size()) + " ops from " +
                     std::to_string(bc.source.tokens.size()) + " tokens\n");
      }
      return 0;
    }
  } catch (const bft::ParseError& e) {
    std::cerr << "bft: parse: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "bft: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
