#include "bft/engine.hpp"

#include <algorithm>

namespace bft {

const char* halt_reason_name(HaltReason r) {
  switch (r) {
    case HaltReason::Completed: return "completed";
    case HaltReason::StepLimit: return "step-limit";
    case HaltReason::TapeLimit: return "tape-limit";
    case HaltReason::Underflow: return "underflow";
  }
  return "unknown";
}

std::vector<std::uint32_t> Tape::snapshot(std::int64_t from,
                                          std::int64_t count) const {
  std::vector<std::uint32_t> out(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] = get(from + k);
  }
  return out;
}

SnapshotPolicy SnapshotPolicy::every(std::uint64_t k) {
  SnapshotPolicy p;
  p.kind = Kind::EveryK;
  p.every_k = k == 0 ? 1 : k;
  return p;
}

SnapshotPolicy SnapshotPolicy::at_ips(std::vector<std::uint32_t> ips) {
  SnapshotPolicy p;
  p.kind = Kind::AtIpSet;
  p.ip_set = std::move(ips);
  return p;
}

SnapshotPolicy SnapshotPolicy::full() {
  SnapshotPolicy p;
  p.kind = Kind::Full;
  return p;
}

namespace {

struct Limits {
  std::uint32_t mask;
  bool strict;
  std::uint64_t step_limit;
  std::uint64_t tape_limit;
};

Limits make_limits(const EngineConfig& config) {
  config.validate();
  return {config.cell_mask(),
          config.underflow_policy == UnderflowPolicy::Strict,
          config.step_limit.value_or(UINT64_MAX),
          config.tape_limit.value_or(UINT64_MAX)};
}

// Executes exactly one instruction. A failed move (underflow, tape budget)
// leaves head and step count untouched and flips status to Error.
inline void exec_one(MachineState& s, Instruction op, const std::uint32_t* jt,
                     std::string_view data, const Limits& lim) {
  switch (op) {
    case Instruction::MoveRight: {
      std::int64_t h = s.head + 1;
      if (h > s.max_head) {
        if (static_cast<std::uint64_t>(h - s.min_head) >= lim.tape_limit) {
          s.status = RunStatus::Error;
          s.halt_reason = HaltReason::TapeLimit;
          return;
        }
        s.max_head = h;
      }
      s.head = h;
      ++s.ip;
      ++s.steps;
      return;
    }
    case Instruction::MoveLeft: {
      if (s.head == 0 && lim.strict) {
        s.status = RunStatus::Error;
        s.halt_reason = HaltReason::Underflow;
        return;
      }
      std::int64_t h = s.head - 1;
      if (h < s.min_head) {
        if (static_cast<std::uint64_t>(s.max_head - h) >= lim.tape_limit) {
          s.status = RunStatus::Error;
          s.halt_reason = HaltReason::TapeLimit;
          return;
        }
        s.min_head = h;
      }
      s.head = h;
      ++s.ip;
      ++s.steps;
      return;
    }
    case Instruction::Inc: {
      auto& c = s.tape.at(s.head);
      c = (c + 1) & lim.mask;
      ++s.ip;
      ++s.steps;
      return;
    }
    case Instruction::Dec: {
      auto& c = s.tape.at(s.head);
      c = (c - 1) & lim.mask;
      ++s.ip;
      ++s.steps;
      return;
    }
    case Instruction::Input: {
      // An exhausted stream leaves the cell as it was, whatever it held.
      if (s.input_cursor < data.size()) {
        s.tape.at(s.head) =
            static_cast<unsigned char>(data[s.input_cursor++]);
      }
      ++s.ip;
      ++s.steps;
      return;
    }
    case Instruction::Output: {
      s.output.push_back(static_cast<char>(s.tape.get(s.head) & 0xFF));
      ++s.ip;
      ++s.steps;
      return;
    }
    case Instruction::LoopOpen: {
      s.ip = s.tape.get(s.head) == 0 ? jt[s.ip] + 1 : s.ip + 1;
      ++s.steps;
      return;
    }
    case Instruction::LoopClose: {
      s.ip = s.tape.get(s.head) != 0 ? jt[s.ip] + 1 : s.ip + 1;
      ++s.steps;
      return;
    }
  }
}

ExecutionOutcome seal(MachineState&& s) {
  if (s.status == RunStatus::Running) {
    s.status = RunStatus::Halted;
    s.halt_reason = HaltReason::Completed;
  }
  ExecutionOutcome out;
  out.steps = s.steps;
  out.halt_reason = s.halt_reason;
  out.final_state = std::move(s);
  out.output = out.final_state.output;
  return out;
}

template <class Hook>
ExecutionOutcome run_impl(const Program& p, std::string_view data,
                          const EngineConfig& config, Hook&& hook) {
  const Limits lim = make_limits(config);
  MachineState s;
  const auto n = static_cast<std::uint32_t>(p.tokens.size());
  const Instruction* toks = p.tokens.data();
  const std::uint32_t* jt = p.jump_table.data();
  while (s.ip < n) {
    hook(s, toks[s.ip]);
    if (s.steps >= lim.step_limit) {
      s.status = RunStatus::Error;
      s.halt_reason = HaltReason::StepLimit;
      break;
    }
    exec_one(s, toks[s.ip], jt, data, lim);
    if (s.status != RunStatus::Running) break;
  }
  return seal(std::move(s));
}

std::string_view effective_data(const Program& p,
                                const std::optional<std::string_view>& data) {
  return data ? *data : std::string_view(p.data_segment);
}

}  // namespace

void step(MachineState& state, const Program& program, std::string_view data,
          const EngineConfig& config) {
  if (state.status != RunStatus::Running) return;
  const Limits lim = make_limits(config);
  if (state.ip >= program.tokens.size()) {
    state.status = RunStatus::Halted;
    state.halt_reason = HaltReason::Completed;
    return;
  }
  if (state.steps >= lim.step_limit) {
    state.status = RunStatus::Error;
    state.halt_reason = HaltReason::StepLimit;
    return;
  }
  exec_one(state, program.tokens[state.ip], program.jump_table.data(), data,
           lim);
}

ExecutionOutcome run(const Program& program,
                     std::optional<std::string_view> data,
                     const EngineConfig& config) {
  return run_impl(program, effective_data(program, data), config,
                  [](const MachineState&, Instruction) {});
}

ExecutionOutcome run_streamed(
    const Program& program, std::optional<std::string_view> data,
    const EngineConfig& config, const SnapshotPolicy& policy,
    const std::function<void(const TraceEvent&)>& on_event) {
  auto emit_full = [&](const MachineState& s, Instruction op) {
    TraceEvent ev;
    ev.step = s.steps;
    ev.ip = s.ip;
    ev.head = s.head;
    ev.op = op;
    ev.window_start = s.min_head;
    ev.window = s.tape.snapshot(s.min_head, s.max_head - s.min_head + 1);
    on_event(ev);
  };
  switch (policy.kind) {
    case SnapshotPolicy::Kind::EveryK: {
      const std::uint64_t k = policy.every_k == 0 ? 1 : policy.every_k;
      return run_impl(program, effective_data(program, data), config,
                      [&](const MachineState& s, Instruction op) {
                        if (s.steps % k != 0) return;
                        TraceEvent ev;
                        ev.step = s.steps;
                        ev.ip = s.ip;
                        ev.head = s.head;
                        ev.op = op;
                        ev.window_start = std::max(s.min_head, s.head - 8);
                        ev.window = s.tape.snapshot(ev.window_start, 16);
                        on_event(ev);
                      });
    }
    case SnapshotPolicy::Kind::AtIpSet: {
      std::vector<std::uint8_t> member(program.tokens.size(), 0);
      for (std::uint32_t ip : policy.ip_set) {
        if (ip < member.size()) member[ip] = 1;
      }
      return run_impl(program, effective_data(program, data), config,
                      [&](const MachineState& s, Instruction op) {
                        if (member[s.ip]) emit_full(s, op);
                      });
    }
    case SnapshotPolicy::Kind::Full:
      return run_impl(program, effective_data(program, data), config,
                      emit_full);
  }
  return run(program, data, config);  // unreachable
}

std::pair<ExecutionOutcome, std::vector<TraceEvent>> run_traced(
    const Program& program, std::optional<std::string_view> data,
    const EngineConfig& config, const SnapshotPolicy& policy) {
  std::vector<TraceEvent> events;
  auto outcome = run_streamed(program, data, config, policy,
                              [&](const TraceEvent& ev) { events.push_back(ev); });
  return {std::move(outcome), std::move(events)};
}

}  // namespace bft
