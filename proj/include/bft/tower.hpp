#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bft/engine.hpp"

namespace bft {

// dbfi: a self-interpreter for this language. Reads its input stream as
// program text up to the first '!', then executes it against the rest of
// the stream. Stacking N copies in front of a program runs it N levels
// deep.
extern const std::string_view kDbfiSource;

enum class EngineKind : std::uint8_t { Direct, Bytecode };

struct TowerJob {
  std::string program_source;  // code only; its '!' suffix and data split off
  std::string data;
  int levels = 1;  // 0 = run the program directly
  EngineKind engine = EngineKind::Direct;
  EngineConfig config;
  // Step budget for the host run; overrides config.step_limit when set.
  std::optional<std::uint64_t> step_budget;
};

// The (code, input) pair the job's host engine actually runs: levels - 1
// interpreter copies, each '!'-terminated, then the program, '!', data.
std::pair<std::string, std::string> compose_tower(const TowerJob& job);

ExecutionOutcome run_tower(const TowerJob& job);

// An interpreter source without the expected two top-level loops
// (program-reading phase, then the fetch-dispatch phase).
struct StructureMismatch : std::runtime_error {
  explicit StructureMismatch(const std::string& message);
};

// Token index of the '[' opening the interpreter's second top-level loop —
// the fetch-dispatch loop. Every pass through it starts from one converged
// memory layout, which is what the cosimulator checks.
std::uint32_t locate_fetch_boundary(const Program& interpreter);

// A decoded interpreter memory image, or the reference state it should
// equal. sim_cells is trimmed: it extends to the simulated head or the
// rightmost nonzero cell, whichever is farther.
struct LayoutState {
  std::vector<int> codes;  // coded instructions, 1..8
  std::uint32_t sim_ip = 0;
  std::vector<std::uint32_t> sim_cells;
  std::int64_t sim_head = 0;

  bool operator==(const LayoutState&) const = default;
};

struct DecodeError : std::runtime_error {
  DecodeError(std::size_t cell_index, const std::string& message);
  std::size_t cell_index;  // tape position the decode choked on
};

// Reads an interpreter tape image: instruction codes split by a 00 pair at
// the simulated ip, a 00 fence, then (marker, value) cell pairs, marker 2
// up to the simulated head and 0 beyond. Cells past the snapshot are taken
// as zero. Throws DecodeError when the image does not fit that shape.
LayoutState decode_layout(std::span<const std::uint32_t> tape,
                          std::int64_t head);

// The exact tape image dbfi would hold for this state (no trailing zeros).
std::vector<std::uint32_t> predict_layout(const LayoutState& state);

// Reference simulation advanced in lockstep with a hosted run: the program
// executed directly, one instruction at a time, plus the coded-instruction
// view of it.
class ShadowState {
 public:
  ShadowState(Program program, std::string data);

  const std::vector<int>& codes() const { return codes_; }
  std::uint32_t sim_ip() const { return machine_.ip; }
  std::int64_t sim_head() const { return machine_.head; }
  std::uint64_t executed_count() const { return executed_; }
  bool halted() const { return machine_.status != RunStatus::Running; }
  std::vector<std::uint32_t> sim_cells() const;  // trimmed as in LayoutState
  LayoutState as_layout() const;

  void advance();  // one instruction, byte cells, strict tape

 private:
  Program program_;
  std::string data_;
  MachineState machine_;
  std::vector<int> codes_;
  std::uint64_t executed_ = 0;
};

enum class CosimStatus : std::uint8_t {
  Clean,        // every boundary matched and outputs agree
  Mismatch,     // some boundary failed to match (or decode)
  ChainOverrun, // shadow could not reach the decoded state within allowance
  PreRunFailed, // the program does not complete at level 0
  HostFailed,   // the hosting interpreter run errored (e.g. budget)
};

const char* cosim_status_name(CosimStatus s);

struct BoundaryRecord {
  std::uint64_t boundary_no = 0;
  std::uint32_t sim_ip = 0;
  std::int64_t sim_head = 0;
  bool ok = false;
  std::string note;  // empty when ok
};

struct CosimReport {
  CosimStatus status = CosimStatus::Clean;
  std::vector<BoundaryRecord> boundaries;
  std::uint64_t mismatches = 0;
  std::uint64_t chain_overruns = 0;
  bool output_match = false;
  std::string level0_output;
  std::string host_output;
  std::uint64_t host_steps = 0;
  std::uint64_t sim_steps = 0;
  std::string note;  // why a non-Clean status, one line

  bool clean() const { return status == CosimStatus::Clean; }
};

// Runs the program under one interpreter level, decoding the interpreter's
// tape at every fetch boundary and checking it against the shadow run.
// Byte cells only; program_source must not contain '!'. The level-0
// qualifying run happens under Strict regardless of config's policy.
CosimReport cosimulate(std::string_view program_source, std::string_view data,
                       const EngineConfig& config,
                       std::optional<std::uint64_t> host_step_limit = {});

// As cosimulate(), hosting on a caller-supplied interpreter. This is how
// a deliberately broken interpreter is shown to fail its layout checks.
CosimReport cosimulate_with(std::string_view interpreter_source,
                            std::string_view program_source,
                            std::string_view data, const EngineConfig& config,
                            std::optional<std::uint64_t> host_step_limit = {});

// One JSON object per line: a record per boundary, then a summary record.
void report_to_jsonl(const CosimReport& report, std::ostream& os);

}  // namespace bft
