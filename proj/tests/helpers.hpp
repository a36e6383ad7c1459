#pragma once

#include <cstdint>
#include <optional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bft/engine.hpp"

namespace bft_test {

// Programs with known behavior, exercised across every engine and level.
struct Example {
  const char* name;
  const char* source;    // full stream: code + '!' + data
  const char* expected;  // output bytes
};

inline const std::vector<Example>& example_corpus() {
  static const std::vector<Example> corpus = {
      {"inc-echo", ",+.!a", "b"},
      {"duplicate", ",[>+>+<<-]>.>.!X", "XX"},
      {"empty-program", "a!", ""},
      {"echo-clear", ",[.[-],]!a", "a"},
      {"quine", ">,[.>,]<[<]>[.>]!>,[.>,]<[<]>[.>]!",
       ">,[.>,]<[<]>[.>]!>,[.>,]<[<]>[.>]!"},
      {"wrap-down", "-.!", "\xFF"},
      {"eof-keeps-value", "+,.!", "\x01"},
      {"nested-copy", ",>,<[>>+<<-]>[>+<-]>.!\x02\x03", "\x05"},
      {"comment-soup", "hello , world + . !a", "b"},
  };
  return corpus;
}

// Bracket-scanning reference interpreter: no jump table, strict byte-cell
// tape, the same step accounting as the engine under test. Deliberately a
// different shape from the production engine so the two can vouch for each
// other.
struct NaiveResult {
  std::string output;
  std::uint64_t steps = 0;
  bft::HaltReason halt = bft::HaltReason::Completed;
};

inline NaiveResult naive_run(std::string_view code, std::string_view data,
                             std::uint64_t step_limit) {
  NaiveResult r;
  std::vector<std::uint32_t> tape(1, 0);
  std::size_t head = 0;
  std::size_t cursor = 0;
  std::size_t i = 0;
  auto is_ins = [](char ch) {
    return ch == '>' || ch == '<' || ch == '+' || ch == '-' || ch == ',' ||
           ch == '.' || ch == '[' || ch == ']';
  };
  while (i < code.size()) {
    char ch = code[i];
    if (!is_ins(ch)) {
      ++i;
      continue;
    }
    if (r.steps >= step_limit) {
      r.halt = bft::HaltReason::StepLimit;
      return r;
    }
    switch (ch) {
      case '>':
        ++head;
        if (head >= tape.size()) tape.push_back(0);
        ++i;
        break;
      case '<':
        if (head == 0) {
          r.halt = bft::HaltReason::Underflow;
          return r;
        }
        --head;
        ++i;
        break;
      case '+':
        tape[head] = (tape[head] + 1) & 0xFF;
        ++i;
        break;
      case '-':
        tape[head] = (tape[head] - 1) & 0xFF;
        ++i;
        break;
      case ',':
        if (cursor < data.size()) {
          tape[head] = static_cast<unsigned char>(data[cursor++]);
        }
        ++i;
        break;
      case '.':
        r.output.push_back(static_cast<char>(tape[head]));
        ++i;
        break;
      case '[':
        if (tape[head] == 0) {
          int l = 0;
          std::size_t j = i;
          do {
            if (code[j] == '[') ++l;
            else if (code[j] == ']') --l;
            ++j;
          } while (l != 0);
          i = j;  // one past the matching ']'
        } else {
          ++i;
        }
        break;
      case ']':
        if (tape[head] != 0) {
          int l = 0;
          std::size_t j = i;
          do {
            if (code[j] == ']') ++l;
            else if (code[j] == '[') --l;
            --j;
          } while (l != 0);
          i = j + 2;  // one past the matching '['
        } else {
          ++i;
        }
        break;
    }
    ++r.steps;
  }
  return r;
}

// Sparse-tape reference: a sparse signed-byte map indexed by a head that
// roams both directions, scan-based jumps, failed reads leaving the cell
// alone. Mirrors the classic minimal interpreter shape for this language.
// Returns nullopt if the run outlives max_ops (a harness guard, not part
// of the semantics).
inline std::optional<std::string> sparse_reference_run(
    std::string_view source, std::uint64_t max_ops = 50'000'000) {
  auto bang = source.find('!');
  std::string c(source.substr(0, bang == std::string_view::npos
                                     ? source.size()
                                     : bang));
  std::string_view input =
      bang == std::string_view::npos ? "" : source.substr(bang + 1);
  std::size_t cursor = 0;
  std::map<long long, char> m;
  long long p = 0;
  std::string out;
  std::uint64_t ops = 0;
  for (long long i = 0; i < static_cast<long long>(c.size()); i++) {
    if (++ops > max_ops) return std::nullopt;
    int l = 1;
    if (c[i] == ']' && m[p]) {
      while (l) {
        i--;
        l += (c[i] == ']') - (c[i] == '[');
      }
    }
    if (c[i] == '[' && !m[p]) {
      while (l) {
        i++;
        l -= (c[i] == ']') - (c[i] == '[');
      }
    }
    if (c[i] == '+') m[p]++;
    if (c[i] == '-') m[p]--;
    if (c[i] == '.') out.push_back(m[p]);
    if (c[i] == ',') {
      if (cursor < input.size()) m[p] = input[cursor++];
    }
    if (c[i] == '>') p++;
    if (c[i] == '<') p--;
  }
  return out;
}

// depth nested loops entered once each: the cell arrives as 1, the body
// zeroes it and prints, and every close falls through.
inline std::string deep_nest_program(int depth) {
  std::string s = "+";
  for (int i = 0; i < depth; ++i) s += "[";
  s += "-.";
  for (int i = 0; i < depth; ++i) s += "]";
  return s;
}

}  // namespace bft_test
