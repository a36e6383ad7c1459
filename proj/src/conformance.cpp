#include "bft/conformance.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <thread>

#include "json.hpp"

namespace bft {

namespace {

// Bias from the modulo is irrelevant here and the result, unlike the
// standard distributions, is the same on every platform.
std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : rng() % n;
}

std::optional<Instruction> draw(std::mt19937_64& rng, const GenParams& p,
                                bool allow_loop) {
  std::uint64_t total = 0;
  for (int i = 0; i < kInstructionCount; ++i) {
    auto ins = static_cast<Instruction>(i);
    if (ins == Instruction::LoopClose) continue;
    if (ins == Instruction::LoopOpen && !allow_loop) continue;
    total += p.weights[i];
  }
  if (total == 0) return std::nullopt;
  std::uint64_t pick = rand_below(rng, total);
  for (int i = 0; i < kInstructionCount; ++i) {
    auto ins = static_cast<Instruction>(i);
    if (ins == Instruction::LoopClose) continue;
    if (ins == Instruction::LoopOpen && !allow_loop) continue;
    if (pick < p.weights[i]) return ins;
    pick -= p.weights[i];
  }
  return std::nullopt;  // unreachable
}

void gen_seq(std::string& out, std::mt19937_64& rng, const GenParams& p,
             std::uint32_t budget, std::uint32_t depth) {
  while (budget > 0) {
    bool allow_loop = depth < p.max_depth && budget >= 2;
    auto ins = draw(rng, p, allow_loop);
    if (!ins) return;
    if (*ins == Instruction::LoopOpen) {
      auto body = static_cast<std::uint32_t>(rand_below(rng, budget - 1));
      out.push_back('[');
      gen_seq(out, rng, p, body, depth + 1);
      out.push_back(']');
      budget -= 2 + body;
    } else {
      out.push_back(instruction_char(*ins));
      --budget;
    }
  }
}

}  // namespace

GenCase gen_program(const GenParams& params, std::uint64_t index) {
  std::seed_seq seq{params.rng_seed, index};
  std::mt19937_64 rng(seq);
  GenCase c;
  auto target = static_cast<std::uint32_t>(
      rand_below(rng, static_cast<std::uint64_t>(params.max_tokens) + 1));
  gen_seq(c.code, rng, params, target, 0);
  std::uint32_t lo = std::min(params.data_min, params.data_max);
  std::uint32_t hi = std::max(params.data_min, params.data_max);
  auto len = lo + static_cast<std::uint32_t>(rand_below(rng, hi - lo + 1));
  c.data.reserve(len);
  for (std::uint32_t i = 0; i < len; ++i) {
    std::uint64_t b =
        params.allow_nul ? rand_below(rng, 256) : 1 + rand_below(rng, 255);
    c.data.push_back(static_cast<char>(static_cast<unsigned char>(b)));
  }
  c.source = c.code + "!" + c.data;
  c.program = parse(c.source);
  return c;
}

const char* filter_outcome_name(FilterOutcome f) {
  switch (f) {
    case FilterOutcome::Accept: return "accept";
    case FilterOutcome::RejectUnderflow: return "reject-underflow";
    case FilterOutcome::RejectStepLimit: return "reject-step-limit";
    case FilterOutcome::RejectTapeLimit: return "reject-tape-limit";
  }
  return "unknown";
}

FilterOutcome filter_defined(const Program& program, std::string_view data,
                             const EngineConfig& config) {
  switch (run(program, data, config).halt_reason) {
    case HaltReason::Completed: return FilterOutcome::Accept;
    case HaltReason::Underflow: return FilterOutcome::RejectUnderflow;
    case HaltReason::StepLimit: return FilterOutcome::RejectStepLimit;
    case HaltReason::TapeLimit: return FilterOutcome::RejectTapeLimit;
  }
  return FilterOutcome::Accept;  // unreachable
}

const char* diff_verdict_name(DiffVerdict v) {
  switch (v) {
    case DiffVerdict::Agree: return "agree";
    case DiffVerdict::Disagree: return "disagree";
    case DiffVerdict::Skipped: return "skipped";
  }
  return "unknown";
}

namespace {

std::size_t first_output_diff(const std::string& a, const std::string& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return i;
  }
  return n;
}

}  // namespace

DiffResult diff_run(const GenCase& c, const DiffOptions& opt) {
  DiffResult r;
  r.level0_budget = opt.level0_budget;
  r.level1_budget = opt.level0_budget * opt.level1_overhead;

  EngineConfig cfg = EngineConfig::portable();
  cfg.step_limit = opt.level0_budget;

  ExecutionOutcome direct = run(c.program, std::string_view(c.data), cfg);
  r.outcomes.push_back(
      {"direct-l0", direct.output, direct.halt_reason, direct.steps});
  if (direct.halt_reason != HaltReason::Completed) {
    r.verdict = DiffVerdict::Skipped;
    r.detail = std::string("level 0 ") + halt_reason_name(direct.halt_reason);
    return r;
  }

  ExecutionOutcome bl0 = execute(compile(c.program), std::string_view(c.data), cfg);
  r.outcomes.push_back({"bytecode-l0", bl0.output, bl0.halt_reason, bl0.steps});
  if (bl0.output != direct.output || bl0.halt_reason != direct.halt_reason) {
    r.verdict = DiffVerdict::Disagree;
    r.divergence_index = first_output_diff(direct.output, bl0.output);
    r.detail = std::string("direct-l0 vs bytecode-l0: ") +
               (bl0.output != direct.output ? "output bytes differ"
                                            : "halt reasons differ");
    return r;
  }

  if (!opt.include_level1) return r;

  TowerJob job;
  job.program_source = c.code;
  job.data = c.data;
  job.levels = 1;
  job.engine = EngineKind::Bytecode;
  job.config = EngineConfig::portable();
  job.step_budget = r.level1_budget;
  ExecutionOutcome l1 = run_tower(job);
  r.outcomes.push_back({"bytecode-l1", l1.output, l1.halt_reason, l1.steps});

  if (l1.halt_reason == HaltReason::StepLimit) {
    // Partial output must still be a prefix of the reference output;
    // otherwise the budget did not mask anything and this is a real split.
    if (direct.output.compare(0, l1.output.size(), l1.output) == 0) {
      r.verdict = DiffVerdict::Skipped;
      r.detail = "level 1 step budget exhausted";
      return r;
    }
    r.verdict = DiffVerdict::Disagree;
    r.divergence_index = first_output_diff(direct.output, l1.output);
    r.detail = "direct-l0 vs bytecode-l1: outputs split before the budget";
    return r;
  }
  if (l1.halt_reason != HaltReason::Completed ||
      l1.output != direct.output) {
    r.verdict = DiffVerdict::Disagree;
    r.divergence_index = first_output_diff(direct.output, l1.output);
    r.detail = std::string("direct-l0 vs bytecode-l1: ") +
               (l1.output != direct.output
                    ? "output bytes differ"
                    : std::string("host ended with ") +
                          halt_reason_name(l1.halt_reason));
    return r;
  }
  return r;
}

const char* mutation_name(Mutation m) {
  switch (m) {
    case Mutation::EofWritesZero: return "eof-writes-zero";
    case Mutation::JumpSkipsOne: return "jump-skips-one";
    case Mutation::NoWrap: return "no-wrap";
    case Mutation::SwappedIncDec: return "swapped-inc-dec";
    case Mutation::OutputNeighbor: return "output-neighbor";
  }
  return "unknown";
}

ExecutionOutcome run_mutant(Mutation m, const Program& program,
                            std::string_view data, std::uint64_t step_limit) {
  MachineState s;
  const auto n = static_cast<std::uint32_t>(program.tokens.size());
  while (s.ip < n) {
    if (s.steps >= step_limit) {
      s.status = RunStatus::Error;
      s.halt_reason = HaltReason::StepLimit;
      break;
    }
    Instruction op = program.tokens[s.ip];
    if (m == Mutation::SwappedIncDec) {
      if (op == Instruction::Inc) op = Instruction::Dec;
      else if (op == Instruction::Dec) op = Instruction::Inc;
    }
    switch (op) {
      case Instruction::MoveRight:
        ++s.head;
        if (s.head > s.max_head) s.max_head = s.head;
        break;
      case Instruction::MoveLeft:
        if (s.head == 0) {
          s.status = RunStatus::Error;
          s.halt_reason = HaltReason::Underflow;
        } else {
          --s.head;
        }
        break;
      case Instruction::Inc: {
        auto& cell = s.tape.at(s.head);
        if (m == Mutation::NoWrap) {
          if (cell < 255) ++cell;
        } else {
          cell = (cell + 1) & 0xFF;
        }
        break;
      }
      case Instruction::Dec: {
        auto& cell = s.tape.at(s.head);
        if (m == Mutation::NoWrap) {
          if (cell > 0) --cell;
        } else {
          cell = (cell - 1) & 0xFF;
        }
        break;
      }
      case Instruction::Input:
        if (s.input_cursor < data.size()) {
          s.tape.at(s.head) =
              static_cast<unsigned char>(data[s.input_cursor++]);
        } else if (m == Mutation::EofWritesZero) {
          s.tape.at(s.head) = 0;
        }
        break;
      case Instruction::Output: {
        std::int64_t from =
            m == Mutation::OutputNeighbor ? s.head + 1 : s.head;
        s.output.push_back(static_cast<char>(s.tape.get(from) & 0xFF));
        break;
      }
      case Instruction::LoopOpen:
        if (s.tape.get(s.head) == 0) {
          std::uint32_t target = program.jump_table[s.ip] + 1;
          if (m == Mutation::JumpSkipsOne) ++target;
          s.ip = target;
          ++s.steps;
          continue;
        }
        break;
      case Instruction::LoopClose:
        if (s.tape.get(s.head) != 0) {
          s.ip = program.jump_table[s.ip] + 1;
          ++s.steps;
          continue;
        }
        break;
    }
    if (s.status != RunStatus::Running) break;
    ++s.ip;
    ++s.steps;
  }
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

std::optional<std::uint64_t> find_mutant_witness(Mutation m,
                                                 const GenParams& params,
                                                 std::uint64_t cases,
                                                 std::uint64_t step_limit) {
  EngineConfig cfg = EngineConfig::portable();
  cfg.step_limit = step_limit;
  for (std::uint64_t i = 0; i < cases; ++i) {
    GenCase c = gen_program(params, i);
    ExecutionOutcome ref = run(c.program, std::string_view(c.data), cfg);
    if (ref.halt_reason != HaltReason::Completed) continue;
    ExecutionOutcome mut =
        run_mutant(m, c.program, std::string_view(c.data), step_limit);
    if (mut.output != ref.output || mut.halt_reason != ref.halt_reason) {
      return i;
    }
  }
  return std::nullopt;
}

FuzzReport run_fuzz(const FuzzOptions& opt) {
  FuzzReport rep;
  rep.cases = opt.cases;
  rep.records.resize(opt.cases);

  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::uint64_t i = next.fetch_add(1);
      if (i >= opt.cases) return;
      GenCase c = gen_program(opt.gen, i);
      DiffResult d = diff_run(c, opt.diff);
      CaseRecord& rec = rep.records[i];
      rec.index = i;
      rec.verdict = d.verdict;
      rec.detail = d.detail;
      rec.divergence_index = d.divergence_index;
      if (d.verdict == DiffVerdict::Disagree && !opt.repro_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof(name), "case_%06llu.b!",
                      static_cast<unsigned long long>(i));
        rec.repro_path = opt.repro_dir + "/" + name;
        std::ofstream f(rec.repro_path, std::ios::binary);
        f.write(c.source.data(),
                static_cast<std::streamsize>(c.source.size()));
      }
    }
  };

  unsigned jobs = opt.jobs == 0 ? 1 : opt.jobs;
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const CaseRecord& rec : rep.records) {
    switch (rec.verdict) {
      case DiffVerdict::Agree: ++rep.agreed; break;
      case DiffVerdict::Disagree: ++rep.disagreed; break;
      case DiffVerdict::Skipped: ++rep.skipped; break;
    }
  }
  return rep;
}

void report_to_jsonl(const FuzzReport& report, std::ostream& os) {
  for (const CaseRecord& rec : report.records) {
    nlohmann::json j{{"record", "case"},
                     {"index", rec.index},
                     {"verdict", diff_verdict_name(rec.verdict)}};
    if (!rec.detail.empty()) j["detail"] = rec.detail;
    if (rec.verdict == DiffVerdict::Disagree) {
      j["divergence_index"] = rec.divergence_index;
    }
    if (!rec.repro_path.empty()) j["repro"] = rec.repro_path;
    os << j.dump() << '\n';
  }
  nlohmann::json j{{"record", "summary"},
                   {"cases", report.cases},
                   {"agree", report.agreed},
                   {"disagree", report.disagreed},
                   {"skipped", report.skipped}};
  os << j.dump() << '\n';
}

}  // namespace bft
