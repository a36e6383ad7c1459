#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bft/lang.hpp"

namespace bft {

enum class RunStatus : std::uint8_t { Running, Halted, Error };

enum class HaltReason : std::uint8_t {
  Completed,  // ran off the end of the instruction stream
  StepLimit,
  TapeLimit,
  Underflow,
};

const char* halt_reason_name(HaltReason r);

// Growable tape of masked cells. Negative indices only materialize under
// the Sparse underflow policy; everything starts at zero.
class Tape {
 public:
  std::uint32_t get(std::int64_t i) const {
    if (i >= 0) {
      auto u = static_cast<std::uint64_t>(i);
      return u < pos_.size() ? pos_[u] : 0;
    }
    auto u = static_cast<std::uint64_t>(-(i + 1));
    return u < neg_.size() ? neg_[u] : 0;
  }

  // Reference to cell i, growing storage (zero-filled) as needed.
  std::uint32_t& at(std::int64_t i) {
    if (i >= 0) {
      auto u = static_cast<std::size_t>(i);
      if (u >= pos_.size()) grow(pos_, u);
      return pos_[u];
    }
    auto u = static_cast<std::size_t>(-(i + 1));
    if (u >= neg_.size()) grow(neg_, u);
    return neg_[u];
  }

  // Contiguous copy of cells [from, from + count).
  std::vector<std::uint32_t> snapshot(std::int64_t from, std::int64_t count) const;

  std::int64_t right_size() const { return static_cast<std::int64_t>(pos_.size()); }
  std::int64_t left_size() const { return static_cast<std::int64_t>(neg_.size()); }

 private:
  static void grow(std::vector<std::uint32_t>& v, std::size_t need) {
    v.resize(need + 1 > v.size() * 2 ? need + 1 : v.size() * 2);
  }
  std::vector<std::uint32_t> pos_;
  std::vector<std::uint32_t> neg_;
};

struct MachineState {
  Tape tape;
  std::int64_t head = 0;
  std::uint32_t ip = 0;
  std::size_t input_cursor = 0;
  std::string output;
  std::uint64_t steps = 0;
  RunStatus status = RunStatus::Running;
  HaltReason halt_reason = HaltReason::Completed;  // meaningful once halted
  // Extremes the head has ever reached; their span is what tape_limit bounds.
  std::int64_t min_head = 0;
  std::int64_t max_head = 0;

  std::uint64_t cells_touched() const {
    return static_cast<std::uint64_t>(max_head - min_head) + 1;
  }
};

struct ExecutionOutcome {
  std::string output;
  std::uint64_t steps = 0;
  HaltReason halt_reason = HaltReason::Completed;
  MachineState final_state;
};

// One pre-execution observation of the machine.
struct TraceEvent {
  std::uint64_t step = 0;
  std::uint32_t ip = 0;
  std::int64_t head = 0;
  Instruction op = Instruction::MoveRight;
  std::int64_t window_start = 0;
  std::vector<std::uint32_t> window;
};

// When to emit TraceEvents. EveryK snapshots a small window around the
// head; AtIpSet and Full snapshot the whole touched extent.
struct SnapshotPolicy {
  enum class Kind : std::uint8_t { EveryK, AtIpSet, Full };
  Kind kind = Kind::Full;
  std::uint64_t every_k = 1;
  std::vector<std::uint32_t> ip_set;

  static SnapshotPolicy every(std::uint64_t k);
  static SnapshotPolicy at_ips(std::vector<std::uint32_t> ips);
  static SnapshotPolicy full();
};

// Executes one instruction (or errors out trying). No-op unless
// state.status is Running. `data` is the input stream the cursor indexes.
void step(MachineState& state, const Program& program, std::string_view data,
          const EngineConfig& config);

// Runs a program to halt. `data` overrides the program's own data segment
// when present.
ExecutionOutcome run(const Program& program,
                     std::optional<std::string_view> data,
                     const EngineConfig& config);

// As run(), invoking on_event per SnapshotPolicy before an instruction
// executes. Observation only: the outcome is identical to run()'s.
ExecutionOutcome run_streamed(
    const Program& program, std::optional<std::string_view> data,
    const EngineConfig& config, const SnapshotPolicy& policy,
    const std::function<void(const TraceEvent&)>& on_event);

// As run_streamed(), collecting the events.
std::pair<ExecutionOutcome, std::vector<TraceEvent>> run_traced(
    const Program& program, std::optional<std::string_view> data,
    const EngineConfig& config, const SnapshotPolicy& policy);

}  // namespace bft
