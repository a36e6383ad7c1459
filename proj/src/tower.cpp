#include "bft/tower.hpp"

#include <algorithm>
#include <ostream>

#include "bft/bytecode.hpp"
#include "json.hpp"

namespace bft {

namespace {

constexpr char kDbfiText[] =
    R"(>>>+[[-]>>[-]++>+>+++++++[<++++>>++<-]++>>+>+>+++++[>
++>++++++<<-]+>>>,<++[[>[->>]<[>>]<<-]<[<]<+>>[>]>[<+
>-[[<+>-]>]<[[[-]<]++<-[<+++++++++>[<->-]>>]>>]]<<]<]
<
[[<]>[[>]>>[>>]+[<<]<[<]<+>>-]>[>]+[->>]<<<<[[<<]<[<]
+<<[+>+<<-[>-->+<<-[>+<[>>+<<-]]]>[<+>-]<]++>>-->[>]>
>[>>]]<<[>>+<[[<]<]>[[<<]<[<]+[-<+>>-[<<+>++>-[<->[<<
+>>-]]]<[>+<-]>]>[>]>]>[>>]>>]<<[>>+>>+>>]<<[->>>>>>>
>]<<[>.>>>>>>>]<<[>->>>>>]<<[>,>>>]<<[>+>]<<[+<<]<])";

}  // namespace

const std::string_view kDbfiSource{kDbfiText, sizeof(kDbfiText) - 1};

std::pair<std::string, std::string> compose_tower(const TowerJob& job) {
  if (job.levels <= 0) return {job.program_source, job.data};
  std::string input;
  for (int i = 1; i < job.levels; ++i) {
    input += kDbfiSource;
    input += '!';
  }
  input += job.program_source;
  input += '!';
  input += job.data;
  return {std::string(kDbfiSource), input};
}

ExecutionOutcome run_tower(const TowerJob& job) {
  if (job.levels < 0) throw std::invalid_argument("levels must be >= 0");
  if (job.levels >= 1 &&
      job.program_source.find('!') != std::string::npos) {
    // A '!' in hosted code would end the interpreter's program read early.
    throw std::invalid_argument(
        "program code must not contain '!' when hosted");
  }
  auto [code, input] = compose_tower(job);
  Program p = parse(code);
  EngineConfig cfg = job.config;
  if (job.step_budget) cfg.step_limit = job.step_budget;
  if (job.engine == EngineKind::Direct) {
    return run(p, std::string_view(input), cfg);
  }
  return execute(compile(p), std::string_view(input), cfg);
}

StructureMismatch::StructureMismatch(const std::string& message)
    : std::runtime_error(message) {}

std::uint32_t locate_fetch_boundary(const Program& interpreter) {
  std::vector<std::uint32_t> top_opens;
  std::uint32_t depth = 0;
  for (std::uint32_t i = 0; i < interpreter.tokens.size(); ++i) {
    if (interpreter.tokens[i] == Instruction::LoopOpen) {
      if (depth == 0) top_opens.push_back(i);
      ++depth;
    } else if (interpreter.tokens[i] == Instruction::LoopClose) {
      --depth;
    }
  }
  if (top_opens.size() != 2) {
    throw StructureMismatch("expected two top-level loops, found " +
                            std::to_string(top_opens.size()));
  }
  return top_opens[1];
}

DecodeError::DecodeError(std::size_t cell_index_, const std::string& message)
    : std::runtime_error(message), cell_index(cell_index_) {}

LayoutState decode_layout(std::span<const std::uint32_t> tape,
                          std::int64_t /*head*/) {
  auto cell = [&](std::size_t i) -> std::uint32_t {
    return i < tape.size() ? tape[i] : 0;
  };
  std::size_t last_nonzero = tape.size();  // one past, 0 when tape is blank
  while (last_nonzero > 0 && tape[last_nonzero - 1] == 0) --last_nonzero;

  LayoutState st;
  std::size_t i = 0;
  auto read_codes = [&]() {
    while (cell(i) != 0) {
      if (cell(i) > 8) {
        throw DecodeError(i, "cell " + std::to_string(i) + ": " +
                                 std::to_string(cell(i)) +
                                 " is not an instruction code");
      }
      st.codes.push_back(static_cast<int>(cell(i)));
      ++i;
    }
    // every fence is a pair of zeros
    if (cell(i + 1) != 0) {
      throw DecodeError(i, "cell " + std::to_string(i) +
                               ": lone zero where a zero pair belongs");
    }
    i += 2;
  };
  read_codes();
  st.sim_ip = static_cast<std::uint32_t>(st.codes.size());
  read_codes();

  // (marker, value) pairs; markers are 2 up to the simulated head, then 0.
  std::int64_t head_idx = -1;
  bool past_head = false;
  std::vector<std::uint32_t> values;
  while (last_nonzero > i) {
    std::uint32_t marker = cell(i);
    if (marker == 2) {
      if (past_head) {
        throw DecodeError(i, "cell " + std::to_string(i) +
                                 ": marked cell after an unmarked one");
      }
      head_idx = static_cast<std::int64_t>(values.size());
    } else if (marker == 0) {
      past_head = true;
    } else {
      throw DecodeError(i, "cell " + std::to_string(i) + ": marker " +
                               std::to_string(marker) + " is neither 0 nor 2");
    }
    values.push_back(cell(i + 1));
    i += 2;
  }
  if (head_idx < 0) {
    throw DecodeError(i, "no marked cell: simulated head is missing");
  }
  st.sim_head = head_idx;

  std::int64_t keep = head_idx;  // trim trailing zeros beyond the head
  for (std::int64_t k = static_cast<std::int64_t>(values.size()) - 1;
       k > keep; --k) {
    if (values[static_cast<std::size_t>(k)] != 0) {
      keep = k;
      break;
    }
  }
  values.resize(static_cast<std::size_t>(keep) + 1);
  st.sim_cells = std::move(values);
  return st;
}

std::vector<std::uint32_t> predict_layout(const LayoutState& state) {
  std::vector<std::uint32_t> out;
  out.reserve(state.codes.size() + 4 + 2 * state.sim_cells.size());
  for (std::uint32_t k = 0; k < state.sim_ip; ++k) {
    out.push_back(static_cast<std::uint32_t>(state.codes[k]));
  }
  out.push_back(0);
  out.push_back(0);
  for (std::size_t k = state.sim_ip; k < state.codes.size(); ++k) {
    out.push_back(static_cast<std::uint32_t>(state.codes[k]));
  }
  out.push_back(0);
  out.push_back(0);
  for (std::size_t j = 0; j < state.sim_cells.size(); ++j) {
    out.push_back(static_cast<std::int64_t>(j) <= state.sim_head ? 2 : 0);
    out.push_back(state.sim_cells[j]);
  }
  return out;
}

ShadowState::ShadowState(Program program, std::string data)
    : program_(std::move(program)), data_(std::move(data)) {
  codes_.reserve(program_.tokens.size());
  for (Instruction t : program_.tokens) codes_.push_back(instruction_code(t));
}

std::vector<std::uint32_t> ShadowState::sim_cells() const {
  std::int64_t keep = machine_.head;
  for (std::int64_t k = machine_.max_head; k > keep; --k) {
    if (machine_.tape.get(k) != 0) {
      keep = k;
      break;
    }
  }
  return machine_.tape.snapshot(0, keep + 1);
}

LayoutState ShadowState::as_layout() const {
  return {codes_, machine_.ip, sim_cells(), machine_.head};
}

void ShadowState::advance() {
  const std::uint64_t before = machine_.steps;
  step(machine_, program_, data_, EngineConfig::portable());
  executed_ += machine_.steps - before;
}

const char* cosim_status_name(CosimStatus s) {
  switch (s) {
    case CosimStatus::Clean: return "clean";
    case CosimStatus::Mismatch: return "mismatch";
    case CosimStatus::ChainOverrun: return "chain-overrun";
    case CosimStatus::PreRunFailed: return "pre-run-failed";
    case CosimStatus::HostFailed: return "host-failed";
  }
  return "unknown";
}

namespace {

std::string first_difference(const LayoutState& want, const LayoutState& got) {
  if (got.codes != want.codes) return "instruction codes differ";
  if (got.sim_head != want.sim_head) {
    return "head: decoded " + std::to_string(got.sim_head) + ", simulated " +
           std::to_string(want.sim_head);
  }
  std::size_t n = std::max(got.sim_cells.size(), want.sim_cells.size());
  for (std::size_t k = 0; k < n; ++k) {
    std::uint32_t g = k < got.sim_cells.size() ? got.sim_cells[k] : 0;
    std::uint32_t w = k < want.sim_cells.size() ? want.sim_cells[k] : 0;
    if (g != w) {
      return "cell " + std::to_string(k) + ": decoded " + std::to_string(g) +
             ", simulated " + std::to_string(w);
    }
  }
  return "cell image length differs";
}

}  // namespace

CosimReport cosimulate_with(std::string_view interpreter_source,
                            std::string_view program_source,
                            std::string_view data, const EngineConfig& config,
                            std::optional<std::uint64_t> host_step_limit) {
  if (config.cell_width != 8) {
    throw std::invalid_argument("layout checks are defined for byte cells");
  }
  if (program_source.find('!') != std::string_view::npos) {
    throw std::invalid_argument("program source must not contain '!'");
  }
  Program prog = parse(program_source);
  Program interp = parse(std::string(interpreter_source));
  const std::uint32_t fetch_open = locate_fetch_boundary(interp);
  const std::uint32_t fetch_close = interp.jump_table[fetch_open];

  CosimReport rep;

  EngineConfig base_cfg = config;
  base_cfg.underflow_policy = UnderflowPolicy::Strict;
  ExecutionOutcome base = run(prog, data, base_cfg);
  rep.level0_output = base.output;
  rep.sim_steps = base.steps;
  if (base.halt_reason != HaltReason::Completed) {
    rep.status = CosimStatus::PreRunFailed;
    rep.note = std::string("level-0 run ended with ") +
               halt_reason_name(base.halt_reason);
    return rep;
  }

  ShadowState shadow(prog, std::string(data));

  std::string host_input;
  host_input.reserve(program_source.size() + 1 + data.size());
  host_input.append(program_source);
  host_input.push_back('!');
  host_input.append(data);

  EngineConfig host_cfg = EngineConfig::portable();
  host_cfg.step_limit = host_step_limit;

  // Each entry of the fetch loop, and each pass over its closing bracket,
  // observes one converged memory image: decode it and hold it against the
  // shadow run, which may advance at most two instructions to line up.
  bool dead = false;
  auto verify = [&](const TraceEvent& ev) {
    if (dead) return;
    BoundaryRecord recd;
    recd.boundary_no = rep.boundaries.size();
    try {
      LayoutState got = decode_layout(ev.window, ev.head);
      recd.sim_ip = got.sim_ip;
      recd.sim_head = got.sim_head;
      LayoutState want = shadow.as_layout();
      std::optional<LayoutState> ip_aligned;
      int advanced = 0;
      while (true) {
        if (want.sim_ip == got.sim_ip && !ip_aligned) ip_aligned = want;
        if (want == got) break;
        if (advanced >= 2 || shadow.halted()) break;
        shadow.advance();
        ++advanced;
        want = shadow.as_layout();
      }
      if (want == got) {
        recd.ok = true;
      } else if (ip_aligned) {
        recd.ok = false;
        recd.note = first_difference(*ip_aligned, got);
        ++rep.mismatches;
      } else {
        recd.ok = false;
        recd.note = "decoded ip " + std::to_string(got.sim_ip) +
                    " not reached within two simulated steps";
        ++rep.chain_overruns;
        dead = true;
      }
      // the interpreter parks its head one past the code image
      const std::int64_t expected_head =
          static_cast<std::int64_t>(got.codes.size()) + 1;
      if (recd.ok && ev.head != expected_head) {
        recd.ok = false;
        recd.note = "host head at " + std::to_string(ev.head) +
                    ", expected " + std::to_string(expected_head);
        ++rep.mismatches;
      }
    } catch (const DecodeError& e) {
      recd.ok = false;
      recd.note = e.what();
      ++rep.mismatches;
    }
    rep.boundaries.push_back(std::move(recd));
  };

  ExecutionOutcome host = run_streamed(
      interp, std::string_view(host_input), host_cfg,
      SnapshotPolicy::at_ips({fetch_open, fetch_close}), verify);
  rep.host_output = host.output;
  rep.host_steps = host.steps;
  rep.output_match = host.halt_reason == HaltReason::Completed &&
                     host.output == base.output;

  if (rep.chain_overruns > 0) {
    rep.status = CosimStatus::ChainOverrun;
    rep.note = "shadow run lost the interpreter";
  } else if (rep.mismatches > 0) {
    rep.status = CosimStatus::Mismatch;
    rep.note = "boundary image disagreed with the shadow run";
  } else if (host.halt_reason != HaltReason::Completed) {
    rep.status = CosimStatus::HostFailed;
    rep.note = std::string("host run ended with ") +
               halt_reason_name(host.halt_reason);
  } else if (!rep.output_match) {
    rep.status = CosimStatus::Mismatch;
    rep.note = "host output differs from the level-0 output";
  } else if (shadow.sim_ip() != prog.tokens.size()) {
    rep.status = CosimStatus::Mismatch;
    rep.note = "simulation was not observed through to completion";
  } else {
    rep.status = CosimStatus::Clean;
  }
  return rep;
}

CosimReport cosimulate(std::string_view program_source, std::string_view data,
                       const EngineConfig& config,
                       std::optional<std::uint64_t> host_step_limit) {
  return cosimulate_with(kDbfiSource, program_source, data, config,
                         host_step_limit);
}

void report_to_jsonl(const CosimReport& report, std::ostream& os) {
  for (const BoundaryRecord& b : report.boundaries) {
    nlohmann::json j{{"record", "boundary"},
                     {"boundary_no", b.boundary_no},
                     {"sim_ip", b.sim_ip},
                     {"sim_head", b.sim_head},
                     {"verdict", b.ok ? "ok" : "fail"}};
    if (!b.note.empty()) j["note"] = b.note;
    os << j.dump() << '\n';
  }
  nlohmann::json j{{"record", "summary"},
                   {"status", cosim_status_name(report.status)},
                   {"boundaries", report.boundaries.size()},
                   {"mismatches", report.mismatches},
                   {"chain_overruns", report.chain_overruns},
                   {"output_match", report.output_match},
                   {"level0_steps", report.sim_steps},
                   {"host_steps", report.host_steps},
                   {"level0_output_bytes", report.level0_output.size()},
                   {"host_output_bytes", report.host_output.size()}};
  if (!report.note.empty()) j["note"] = report.note;
  os << j.dump() << '\n';
}

}  // namespace bft
