#pragma once

#include <string>

#include "bft/engine.hpp"

namespace bft {

enum class OpKind : std::uint8_t {
  Move,           // net head shift (coalesced run of > and <)
  Add,            // net cell delta (coalesced run of + and -)
  In,
  Out,
  SetZero,        // exactly the [-] / [+] idiom
  JumpIfZero,     // '[' — target is the op after the matching JumpIfNonzero
  JumpIfNonzero,  // ']' — target is the op after the matching JumpIfZero
};

struct BcOp {
  OpKind kind = OpKind::Move;
  std::int32_t arg = 0;      // Move: net shift; Add: net delta; jumps: target op
  std::int32_t min_off = 0;  // Move only: leftmost offset passed through
  std::int32_t max_off = 0;  // Move only: rightmost offset passed through
  bool via_dec = true;       // SetZero: loop body was '-' (else '+')
  std::uint32_t tok_lo = 0;  // originating token span [tok_lo, tok_hi)
  std::uint32_t tok_hi = 0;
};

struct Bytecode {
  std::vector<BcOp> ops;
  // Retained for diagnostics and for the tokenwise fallback path; op spans
  // index into source.tokens.
  Program source;
};

// Token spans partition the token stream; net-zero runs still become ops so
// the span map stays total.
Bytecode compile(const Program& program);

// Behaviorally identical to run() on the source program: same output bytes,
// halt reason, step count, head and tape. An op covering k tokens costs k
// steps (SetZero: 1 + 2 x iterations, counted against the live cell value).
// When a step budget, tape budget or underflow would land inside an op, the
// engine replays that op's tokens directly so the halt state is byte-exact.
ExecutionOutcome execute(const Bytecode& bc, std::optional<std::string_view> data,
                         const EngineConfig& config);

// One op per line: MOVE +3 / ADD -1 / IN / OUT / SETZERO / JZ 17 / JNZ 2.
std::string disassemble(const Bytecode& bc);

// The source characters the ops came from.
std::string decompile(const Bytecode& bc);

}  // namespace bft
