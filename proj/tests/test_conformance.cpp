#include <filesystem>
#include <sstream>
#include <string>

#include "bft/conformance.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

using namespace bft;

namespace {

GenCase make_case(const std::string& code, const std::string& data) {
  GenCase c;
  c.code = code;
  c.data = data;
  c.source = code + "!" + data;
  c.program = parse(c.source);
  return c;
}

}  // namespace

TEST_CASE("generation is a pure function of seed and index") {
  GenParams params;
  params.rng_seed = 7;
  for (std::uint64_t i = 0; i < 50; ++i) {
    GenCase a = gen_program(params, i);
    GenCase b = gen_program(params, i);
    REQUIRE(a.source == b.source);
  }
  // a fresh params struct with the same fields draws the same stream
  GenParams again;
  again.rng_seed = 7;
  CHECK(gen_program(again, 17).source == gen_program(params, 17).source);

  // different seeds do not shadow each other
  GenParams other;
  other.rng_seed = 8;
  bool any_difference = false;
  for (std::uint64_t i = 0; i < 20 && !any_difference; ++i) {
    any_difference = gen_program(other, i).source != gen_program(params, i).source;
  }
  CHECK(any_difference);
}

TEST_CASE("generated cases respect every structural bound") {
  GenParams params;
  params.rng_seed = 11;
  params.max_depth = 2;
  bool saw_code = false, saw_data = false;
  for (std::uint64_t i = 0; i < 300; ++i) {
    GenCase c = gen_program(params, i);
    REQUIRE(c.source == c.code + "!" + c.data);
    REQUIRE(c.program.tokens.size() <= params.max_tokens);
    REQUIRE(c.program.nesting_depth() <= params.max_depth);
    REQUIRE(to_source(c.program.tokens) == c.code);
    REQUIRE(c.data.size() <= params.data_max);
    for (char b : c.data) REQUIRE(b != '\0');  // allow_nul is off
    saw_code = saw_code || !c.code.empty();
    saw_data = saw_data || !c.data.empty();
  }
  CHECK(saw_code);
  CHECK(saw_data);

  GenParams fixed;
  fixed.rng_seed = 12;
  fixed.data_min = 3;
  fixed.data_max = 3;
  fixed.allow_nul = true;
  bool saw_nul = false;
  for (std::uint64_t i = 0; i < 1500; ++i) {
    GenCase c = gen_program(fixed, i);
    REQUIRE(c.data.size() == 3);
    for (char b : c.data) saw_nul = saw_nul || b == '\0';
  }
  CHECK(saw_nul);

  GenParams empty;
  empty.max_tokens = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    GenCase c = gen_program(empty, i);
    CHECK(c.code.empty());
    CHECK(c.source == "!" + c.data);
  }
}

TEST_CASE("the defined-behavior filter names its reason") {
  EngineConfig cfg = EngineConfig::portable();
  cfg.step_limit = 1000;
  cfg.tape_limit = 4;
  CHECK(filter_defined(parse("+"), "", cfg) == FilterOutcome::Accept);
  CHECK(filter_defined(parse("<"), "", cfg) == FilterOutcome::RejectUnderflow);
  CHECK(filter_defined(parse("+[]"), "", cfg) ==
        FilterOutcome::RejectStepLimit);
  CHECK(filter_defined(parse(">>>>>>"), "", cfg) ==
        FilterOutcome::RejectTapeLimit);
  CHECK(std::string(filter_outcome_name(FilterOutcome::RejectUnderflow)) ==
        "reject-underflow");
}

TEST_CASE("differential runs agree on the example corpus") {
  for (const auto& ex : bft_test::example_corpus()) {
    std::string src(ex.source);
    auto bang = src.find('!');
    GenCase c = make_case(src.substr(0, bang), src.substr(bang + 1));
    DiffOptions opt;
    DiffResult r = diff_run(c, opt);
    CHECK_MESSAGE(r.verdict == DiffVerdict::Agree, ex.name);
    REQUIRE(r.outcomes.size() == 3);
    CHECK(r.outcomes[0].name == "direct-l0");
    CHECK(r.outcomes[1].name == "bytecode-l0");
    CHECK(r.outcomes[2].name == "bytecode-l1");
    for (const auto& o : r.outcomes) CHECK_MESSAGE(o.output == ex.expected, ex.name);
  }
}

TEST_CASE("differential bookkeeping: budgets, steps, outcome layout") {
  GenCase c = make_case(",+.", "a");
  DiffOptions opt;
  DiffResult r = diff_run(c, opt);
  CHECK(r.verdict == DiffVerdict::Agree);
  CHECK(r.level0_budget == 10'000'000);
  CHECK(r.level1_budget == 100'000'000'000ULL);
  REQUIRE(r.outcomes.size() == 3);
  CHECK(r.outcomes[0].steps == 3);
  CHECK(r.outcomes[1].steps == 3);  // engines must not even disagree on cost
  CHECK(r.outcomes[2].steps == 5375);

  DiffOptions flat;
  flat.include_level1 = false;
  CHECK(diff_run(c, flat).outcomes.size() == 2);
}

TEST_CASE("cases outside defined behavior are skipped, not judged") {
  DiffOptions opt;
  DiffResult under = diff_run(make_case("<", ""), opt);
  CHECK(under.verdict == DiffVerdict::Skipped);
  CHECK(under.detail == "level 0 underflow");
  CHECK(under.outcomes.size() == 1);

  DiffOptions tight;
  tight.level0_budget = 1000;
  DiffResult spin = diff_run(make_case("+[]", ""), tight);
  CHECK(spin.verdict == DiffVerdict::Skipped);
  CHECK(spin.detail == "level 0 step-limit");
}

TEST_CASE("a starved hosted run is a skip when its output is a clean prefix") {
  DiffOptions opt;
  opt.level0_budget = 100;
  opt.level1_overhead = 10;  // 1000 host steps: far too few for any program
  DiffResult r = diff_run(make_case(",+.", "a"), opt);
  CHECK(r.verdict == DiffVerdict::Skipped);
  CHECK(r.detail == "level 1 step budget exhausted");
  CHECK(r.level1_budget == 1000);
  REQUIRE(r.outcomes.size() == 3);
  CHECK(r.outcomes[2].halt == HaltReason::StepLimit);
}

TEST_CASE("each broken engine variant betrays itself on a crafted program") {
  const std::uint64_t lim = 10'000;
  auto ref = [&](const char* src, const char* data) {
    EngineConfig cfg = EngineConfig::portable();
    cfg.step_limit = lim;
    return run(parse(src), std::string_view(data), cfg).output;
  };
  auto mut = [&](Mutation m, const char* src, const char* data) {
    return run_mutant(m, parse(src), data, lim).output;
  };

  // exhausted ',' must keep the cell; this variant zeroes it
  CHECK(ref("+,.", "") == "\x01");
  CHECK(mut(Mutation::EofWritesZero, "+,.", "") == std::string(1, '\0'));
  // '[' on zero lands exactly one past the matching ']'; overshooting by
  // one here skips the '+' and prints the untouched zero
  CHECK(ref("[.]+.", "") == "\x01");
  CHECK(mut(Mutation::JumpSkipsOne, "[.]+.", "") == std::string(1, '\0'));
  // decrement from zero wraps to 255
  CHECK(ref("-.", "") == "\xFF");
  CHECK(mut(Mutation::NoWrap, "-.", "") == std::string(1, '\0'));
  // swapped arithmetic
  CHECK(mut(Mutation::SwappedIncDec, "+.", "") == "\xFF");
  // '.' reads the head cell, not its right neighbour
  CHECK(mut(Mutation::OutputNeighbor, "+.", "") == std::string(1, '\0'));
}

TEST_CASE("the generated corpus catches every broken engine variant") {
  GenParams params;  // the stock fuzzing corpus
  const std::uint64_t cases = 400;
  const std::uint64_t lim = 4096;
  for (int k = 0; k < kMutationCount; ++k) {
    auto m = static_cast<Mutation>(k);
    auto witness = find_mutant_witness(m, params, cases, lim);
    REQUIRE_MESSAGE(witness.has_value(), mutation_name(m));

    // the witness index really is a witness
    GenCase c = gen_program(params, *witness);
    EngineConfig cfg = EngineConfig::portable();
    cfg.step_limit = lim;
    auto good = run(c.program, std::string_view(c.data), cfg);
    auto bad = run_mutant(m, c.program, std::string_view(c.data), lim);
    CHECK(good.halt_reason == HaltReason::Completed);
    CHECK((bad.output != good.output || bad.halt_reason != good.halt_reason));
  }
}

TEST_CASE("a fuzz batch over healthy engines never disagrees") {
  FuzzOptions opt;
  opt.cases = 60;
  opt.diff.level0_budget = 10'000;
  FuzzReport rep = run_fuzz(opt);
  CHECK(rep.cases == 60);
  CHECK(rep.disagreed == 0);
  CHECK(rep.agreed + rep.skipped == 60);
  CHECK(rep.agreed > 0);
  REQUIRE(rep.records.size() == 60);
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    REQUIRE(rep.records[i].index == i);
    CHECK(rep.records[i].verdict != DiffVerdict::Disagree);
    CHECK(rep.records[i].repro_path.empty());
  }
}

TEST_CASE("worker count changes nothing about the verdicts") {
  FuzzOptions opt;
  opt.cases = 40;
  opt.gen.rng_seed = 77;
  opt.diff.level0_budget = 10'000;
  FuzzReport one = run_fuzz(opt);
  opt.jobs = 4;
  FuzzReport four = run_fuzz(opt);
  REQUIRE(one.records.size() == four.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    CHECK(one.records[i].verdict == four.records[i].verdict);
    CHECK(one.records[i].detail == four.records[i].detail);
  }
  CHECK(one.agreed == four.agreed);
  CHECK(one.skipped == four.skipped);
}

TEST_CASE("agreeing batches leave the repro directory untouched") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "bft_repro_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  FuzzOptions opt;
  opt.cases = 30;
  opt.diff.level0_budget = 10'000;
  opt.repro_dir = dir.string();
  FuzzReport rep = run_fuzz(opt);
  CHECK(rep.disagreed == 0);
  CHECK(fs::is_empty(dir));  // repro files exist only for disagreements
  fs::remove_all(dir);
}

TEST_CASE("fuzz reports serialize one record per case plus a summary") {
  FuzzOptions opt;
  opt.cases = 25;
  opt.diff.level0_budget = 10'000;
  FuzzReport rep = run_fuzz(opt);
  std::ostringstream os;
  report_to_jsonl(rep, os);
  std::istringstream is(os.str());
  std::string line;
  std::size_t lines = 0;
  nlohmann::json last;
  while (std::getline(is, line)) {
    last = nlohmann::json::parse(line);
    ++lines;
  }
  CHECK(lines == 26);
  CHECK(last["record"] == "summary");
  CHECK(last["cases"] == 25);
  CHECK(last["agree"].get<std::uint64_t>() +
            last["disagree"].get<std::uint64_t>() +
            last["skipped"].get<std::uint64_t>() ==
        25);
}
