#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bft {

// The eight instructions. The enum order is arbitrary; the two canonical
// orderings (source character, interpreter code) live in the tables below.
enum class Instruction : std::uint8_t {
  MoveRight,
  MoveLeft,
  Inc,
  Dec,
  Input,
  Output,
  LoopOpen,
  LoopClose,
};

inline constexpr int kInstructionCount = 8;

// Source character for an instruction.
char instruction_char(Instruction ins);

// Instruction for a source character, or nullopt for a comment character.
std::optional<Instruction> instruction_from_char(char c);

// dbfi's internal instruction coding: the eight characters in reverse ASCII
// order, coded 1 through 8.
//   ]  [  >  <  .  -  ,  +
//   1  2  3  4  5  6  7  8
int instruction_code(Instruction ins);
std::optional<Instruction> instruction_from_code(int code);

// Unbalanced bracket in the code segment. `offset` is the byte offset into
// the original source of the offending bracket.
struct ParseError : std::runtime_error {
  ParseError(std::size_t offset, const std::string& message);
  std::size_t offset;
};

// A parsed program: the instruction stream plus the data segment that
// followed the first '!' in the source. Comment characters are dropped;
// source_map keeps each token's byte offset for diagnostics.
struct Program {
  std::vector<Instruction> tokens;
  // For '[' and ']', the index of the matching partner; for every other
  // token, its own index.
  std::vector<std::uint32_t> jump_table;
  std::string data_segment;
  std::vector<std::uint32_t> source_map;
  std::uint32_t max_depth = 0;

  std::uint32_t nesting_depth() const { return max_depth; }
};

// Splits the source at the first '!' (everything after it, '!' included
// on later occurrences, is data), drops comment characters, and builds
// the jump table. Throws ParseError on unbalanced brackets.
Program parse(std::string_view source);

// The code segment the token stream came from, comments elided.
std::string to_source(const std::vector<Instruction>& tokens);

// How the tape reacts to a move left of cell zero.
enum class UnderflowPolicy : std::uint8_t {
  Strict,  // error, run halts
  Sparse,  // negative cells exist and start at zero
};

struct EngineConfig {
  int cell_width = 8;  // 8, 16 or 32 bits per cell, wrapping
  UnderflowPolicy underflow_policy = UnderflowPolicy::Strict;
  std::optional<std::uint64_t> step_limit;
  std::optional<std::uint64_t> tape_limit;  // max distinct cells visited

  // Byte cells, moving left of cell zero is an error.
  static EngineConfig portable();
  // Byte cells on an unbounded doubly-infinite tape.
  static EngineConfig sparse();

  std::uint32_t cell_mask() const;
  // Throws std::invalid_argument on an unsupported cell width.
  void validate() const;
};

}  // namespace bft
