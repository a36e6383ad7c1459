#include "bft/lang.hpp"

namespace bft {

namespace {

constexpr std::array<char, kInstructionCount> kChars = {
    '>', '<', '+', '-', ',', '.', '[', ']'};

// Indexed by Instruction; reverse ASCII rank of the character.
constexpr std::array<int, kInstructionCount> kCodes = {3, 4, 8, 6, 7, 5, 2, 1};

}  // namespace

char instruction_char(Instruction ins) {
  return kChars[static_cast<std::size_t>(ins)];
}

std::optional<Instruction> instruction_from_char(char c) {
  for (int i = 0; i < kInstructionCount; ++i) {
    if (kChars[i] == c) return static_cast<Instruction>(i);
  }
  return std::nullopt;
}

int instruction_code(Instruction ins) {
  return kCodes[static_cast<std::size_t>(ins)];
}

std::optional<Instruction> instruction_from_code(int code) {
  for (int i = 0; i < kInstructionCount; ++i) {
    if (kCodes[i] == code) return static_cast<Instruction>(i);
  }
  return std::nullopt;
}

ParseError::ParseError(std::size_t offset_, const std::string& message)
    : std::runtime_error(message), offset(offset_) {}

Program parse(std::string_view source) {
  Program p;
  std::size_t code_end = source.find('!');
  if (code_end == std::string_view::npos) {
    code_end = source.size();
  } else {
    p.data_segment.assign(source.substr(code_end + 1));
  }

  std::vector<std::uint32_t> open_stack;  // token indices of pending '['
  std::uint32_t depth = 0;
  for (std::size_t off = 0; off < code_end; ++off) {
    auto ins = instruction_from_char(source[off]);
    if (!ins) continue;  // comment character
    auto index = static_cast<std::uint32_t>(p.tokens.size());
    p.tokens.push_back(*ins);
    p.source_map.push_back(static_cast<std::uint32_t>(off));
    p.jump_table.push_back(index);
    if (*ins == Instruction::LoopOpen) {
      open_stack.push_back(index);
      ++depth;
      if (depth > p.max_depth) p.max_depth = depth;
    } else if (*ins == Instruction::LoopClose) {
      if (open_stack.empty()) {
        throw ParseError(off, "unmatched ']' at byte " + std::to_string(off));
      }
      std::uint32_t open = open_stack.back();
      open_stack.pop_back();
      --depth;
      p.jump_table[open] = index;
      p.jump_table[index] = open;
    }
  }
  if (!open_stack.empty()) {
    std::size_t off = p.source_map[open_stack.front()];
    throw ParseError(off, "unmatched '[' at byte " + std::to_string(off));
  }
  return p;
}

std::string to_source(const std::vector<Instruction>& tokens) {
  std::string out;
  out.reserve(tokens.size());
  for (Instruction ins : tokens) out.push_back(instruction_char(ins));
  return out;
}

EngineConfig EngineConfig::portable() {
  EngineConfig c;
  c.cell_width = 8;
  c.underflow_policy = UnderflowPolicy::Strict;
  return c;
}

EngineConfig EngineConfig::sparse() {
  EngineConfig c;
  c.cell_width = 8;
  c.underflow_policy = UnderflowPolicy::Sparse;
  return c;
}

std::uint32_t EngineConfig::cell_mask() const {
  switch (cell_width) {
    case 8: return 0xFFu;
    case 16: return 0xFFFFu;
    case 32: return 0xFFFFFFFFu;
    default: break;
  }
  throw std::invalid_argument("unsupported cell width " +
                              std::to_string(cell_width));
}

void EngineConfig::validate() const { (void)cell_mask(); }

}  // namespace bft
