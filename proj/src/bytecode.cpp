#include "bft/bytecode.hpp"

#include <algorithm>

namespace bft {

namespace {

bool is_move(Instruction t) {
  return t == Instruction::MoveRight || t == Instruction::MoveLeft;
}

bool is_add(Instruction t) {
  return t == Instruction::Inc || t == Instruction::Dec;
}

std::string signed_arg(std::int32_t v) {
  return v >= 0 ? "+" + std::to_string(v) : std::to_string(v);
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

}  // namespace

Bytecode compile(const Program& program) {
  Bytecode bc;
  bc.source = program;
  const auto& t = program.tokens;
  const auto n = static_cast<std::uint32_t>(t.size());
  std::vector<std::uint32_t> open_ops;  // op index of each pending JumpIfZero
  std::uint32_t i = 0;
  while (i < n) {
    BcOp op;
    op.tok_lo = i;
    if (is_move(t[i])) {
      op.kind = OpKind::Move;
      std::int32_t off = 0, lo = 0, hi = 0;
      while (i < n && is_move(t[i])) {
        off += t[i] == Instruction::MoveRight ? 1 : -1;
        lo = std::min(lo, off);
        hi = std::max(hi, off);
        ++i;
      }
      op.arg = off;
      op.min_off = lo;
      op.max_off = hi;
    } else if (is_add(t[i])) {
      op.kind = OpKind::Add;
      std::int32_t delta = 0;
      while (i < n && is_add(t[i])) {
        delta += t[i] == Instruction::Inc ? 1 : -1;
        ++i;
      }
      op.arg = delta;
    } else if (t[i] == Instruction::Input) {
      op.kind = OpKind::In;
      ++i;
    } else if (t[i] == Instruction::Output) {
      op.kind = OpKind::Out;
      ++i;
    } else if (t[i] == Instruction::LoopOpen) {
      if (i + 2 < n && is_add(t[i + 1]) && t[i + 2] == Instruction::LoopClose) {
        op.kind = OpKind::SetZero;
        op.via_dec = t[i + 1] == Instruction::Dec;
        i += 3;
      } else {
        op.kind = OpKind::JumpIfZero;
        open_ops.push_back(static_cast<std::uint32_t>(bc.ops.size()));
        ++i;
      }
    } else {  // LoopClose; parse() guarantees balance
      op.kind = OpKind::JumpIfNonzero;
      std::uint32_t open = open_ops.back();
      open_ops.pop_back();
      op.arg = static_cast<std::int32_t>(open + 1);
      bc.ops[open].arg = static_cast<std::int32_t>(bc.ops.size() + 1);
      ++i;
    }
    op.tok_hi = i;
    bc.ops.push_back(op);
  }
  return bc;
}

ExecutionOutcome execute(const Bytecode& bc, std::optional<std::string_view> data_in,
                         const EngineConfig& config) {
  const std::uint32_t mask = config.cell_mask();
  const bool strict = config.underflow_policy == UnderflowPolicy::Strict;
  const std::uint64_t step_limit = config.step_limit.value_or(UINT64_MAX);
  const std::uint64_t tape_limit = config.tape_limit.value_or(UINT64_MAX);
  const std::string_view data =
      data_in ? *data_in : std::string_view(bc.source.data_segment);

  MachineState s;
  const std::size_t nops = bc.ops.size();
  std::size_t pc = 0;
  while (pc < nops) {
    bool bail = false;
    const BcOp& op = bc.ops[pc];
    if (s.steps >= step_limit) {
      s.status = RunStatus::Error;
      s.halt_reason = HaltReason::StepLimit;
      s.ip = op.tok_lo;
      break;
    }
    const std::uint64_t remaining = step_limit - s.steps;
    switch (op.kind) {
      case OpKind::Move: {
        const std::uint64_t span = op.tok_hi - op.tok_lo;
        bail = span > remaining ||
               (strict && s.head + op.min_off < 0);
        if (!bail && tape_limit != UINT64_MAX) {
          const std::int64_t lo = std::min(s.min_head, s.head + op.min_off);
          const std::int64_t hi = std::max(s.max_head, s.head + op.max_off);
          bail = static_cast<std::uint64_t>(hi - lo + 1) > tape_limit;
        }
        if (bail) break;
        s.min_head = std::min(s.min_head, s.head + op.min_off);
        s.max_head = std::max(s.max_head, s.head + op.max_off);
        s.head += op.arg;
        s.steps += span;
        ++pc;
        break;
      }
      case OpKind::Add: {
        const std::uint64_t span = op.tok_hi - op.tok_lo;
        if ((bail = span > remaining)) break;
        auto& c = s.tape.at(s.head);
        c = (c + static_cast<std::uint32_t>(op.arg)) & mask;
        s.steps += span;
        ++pc;
        break;
      }
      case OpKind::In: {
        if (s.input_cursor < data.size()) {
          s.tape.at(s.head) = static_cast<unsigned char>(data[s.input_cursor++]);
        }
        ++s.steps;
        ++pc;
        break;
      }
      case OpKind::Out: {
        s.output.push_back(static_cast<char>(s.tape.get(s.head) & 0xFF));
        ++s.steps;
        ++pc;
        break;
      }
      case OpKind::SetZero: {
        const std::uint32_t v = s.tape.get(s.head);
        const std::uint64_t iters =
            op.via_dec ? v
                       : ((static_cast<std::uint64_t>(mask) + 1 - v) & mask);
        const std::uint64_t charge = 1 + 2 * iters;
        if ((bail = charge > remaining)) break;
        s.tape.at(s.head) = 0;
        s.steps += charge;
        ++pc;
        break;
      }
      case OpKind::JumpIfZero: {
        ++s.steps;
        pc = s.tape.get(s.head) == 0 ? static_cast<std::size_t>(op.arg)
                                     : pc + 1;
        break;
      }
      case OpKind::JumpIfNonzero: {
        ++s.steps;
        pc = s.tape.get(s.head) != 0 ? static_cast<std::size_t>(op.arg)
                                     : pc + 1;
        break;
      }
    }
    if (bail) {
      // The budget boundary or tape fault lands inside this op: replay its
      // tokens directly so the halt state is the one the direct engine
      // produces, byte for byte.
      s.ip = op.tok_lo;
      while (s.status == RunStatus::Running) step(s, bc.source, data, config);
      break;
    }
  }
  if (s.status == RunStatus::Running) {
    s.ip = static_cast<std::uint32_t>(bc.source.tokens.size());
  }
  return seal(std::move(s));
}

std::string disassemble(const Bytecode& bc) {
  std::string out;
  for (const BcOp& op : bc.ops) {
    switch (op.kind) {
      case OpKind::Move: out += "MOVE " + signed_arg(op.arg); break;
      case OpKind::Add: out += "ADD " + signed_arg(op.arg); break;
      case OpKind::In: out += "IN"; break;
      case OpKind::Out: out += "OUT"; break;
      case OpKind::SetZero: out += "SETZERO"; break;
      case OpKind::JumpIfZero: out += "JZ " + std::to_string(op.arg); break;
      case OpKind::JumpIfNonzero: out += "JNZ " + std::to_string(op.arg); break;
    }
    out.push_back('\n');
  }
  return out;
}

std::string decompile(const Bytecode& bc) { return to_source(bc.source.tokens); }

}  // namespace bft
