#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "bft/bytecode.hpp"
#include "bft/tower.hpp"

namespace bft {

struct GenParams {
  std::uint64_t rng_seed = 1;
  std::uint32_t max_tokens = 48;
  std::uint32_t max_depth = 6;
  // Draw weights indexed by Instruction. LoopClose's entry is ignored:
  // every bracket the grammar opens, it closes.
  std::array<std::uint32_t, kInstructionCount> weights{3, 2, 4, 3, 3, 4, 2, 0};
  std::uint32_t data_min = 0;
  std::uint32_t data_max = 8;
  bool allow_nul = false;  // data bytes drawn from 1..255 unless set
};

struct GenCase {
  std::string code;
  std::string data;
  std::string source;  // code + '!' + data, the standalone form
  Program program;
};

// Deterministic everywhere: (params, index) alone decide the case.
GenCase gen_program(const GenParams& params, std::uint64_t index);

enum class FilterOutcome : std::uint8_t {
  Accept,
  RejectUnderflow,
  RejectStepLimit,
  RejectTapeLimit,
};

const char* filter_outcome_name(FilterOutcome f);

// Defined-behavior gate: the program must complete under config's budgets
// on the strict reference engine.
FilterOutcome filter_defined(const Program& program, std::string_view data,
                             const EngineConfig& config);

enum class DiffVerdict : std::uint8_t { Agree, Disagree, Skipped };

const char* diff_verdict_name(DiffVerdict v);

struct ConfigOutcome {
  std::string name;  // "direct-l0", "bytecode-l0", "bytecode-l1"
  std::string output;
  HaltReason halt = HaltReason::Completed;
  std::uint64_t steps = 0;
};

struct DiffOptions {
  std::uint64_t level0_budget = 10'000'000;
  std::uint64_t level1_overhead = 10'000;  // level-1 budget multiplier
  bool include_level1 = true;
};

struct DiffResult {
  DiffVerdict verdict = DiffVerdict::Agree;
  std::string detail;  // skip reason, or what disagreed with what
  std::size_t divergence_index = 0;  // first differing output byte
  std::vector<ConfigOutcome> outcomes;
  std::uint64_t level0_budget = 0;
  std::uint64_t level1_budget = 0;
};

// Runs the case on the strict byte-cell reference engine, the bytecode
// engine, and (optionally) the bytecode engine hosting one interpreter
// level, then compares output bytes and halt reasons. Cases that do not
// complete at level 0, or that outgrow the level-1 budget, are Skipped.
DiffResult diff_run(const GenCase& c, const DiffOptions& opt);

// Reference engines with one deliberately broken rule each; the harness
// has to catch every one of them.
enum class Mutation : std::uint8_t {
  EofWritesZero,    // exhausted input stores 0 instead of leaving the cell
  JumpSkipsOne,     // '[' on zero lands one past the matching ']'s successor
  NoWrap,           // cell arithmetic saturates at 0 and 255
  SwappedIncDec,    // '+' decrements, '-' increments
  OutputNeighbor,   // '.' emits the cell right of the head
};

inline constexpr int kMutationCount = 5;

const char* mutation_name(Mutation m);

ExecutionOutcome run_mutant(Mutation m, const Program& program,
                            std::string_view data, std::uint64_t step_limit);

// First generated case the mutant engine gets visibly wrong (its output or
// halt reason differs from the reference on an accepted program).
std::optional<std::uint64_t> find_mutant_witness(Mutation m,
                                                 const GenParams& params,
                                                 std::uint64_t cases,
                                                 std::uint64_t step_limit);

struct FuzzOptions {
  GenParams gen;
  std::uint64_t cases = 100;
  DiffOptions diff;
  unsigned jobs = 1;
  // When nonempty, each Disagree case lands here verbatim as
  // case_<index>.b! for replay.
  std::string repro_dir;
};

struct CaseRecord {
  std::uint64_t index = 0;
  DiffVerdict verdict = DiffVerdict::Agree;
  std::string detail;
  std::size_t divergence_index = 0;
  std::string repro_path;
};

struct FuzzReport {
  std::uint64_t cases = 0;
  std::uint64_t agreed = 0;
  std::uint64_t disagreed = 0;
  std::uint64_t skipped = 0;
  std::vector<CaseRecord> records;  // one per case, in index order
};

FuzzReport run_fuzz(const FuzzOptions& opt);

// One JSON object per case, then a summary object.
void report_to_jsonl(const FuzzReport& report, std::ostream& os);

}  // namespace bft
