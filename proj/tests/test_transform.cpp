#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "codeclean/model_client.hpp"
#include "codeclean/transform.hpp"
#include "fixtures.hpp"

using namespace codeclean;

namespace {

Problem fixture_problem(size_t idx = 0) {
    const auto& fx = fixtures::oracle_fixtures()[idx];
    Problem p;
    p.id = "p-" + fx.name;
    p.platform = "codeforces";
    p.statement = "Solve task '" + fx.name + "'.";
    p.tests = fx.tests;
    p.reference_solutions = {fx.correct};
    return p;
}

TransformRecord original_record(const Problem& p, const std::string& source) {
    TransformRecord r;
    r.problem_id = p.id;
    r.solution_id = "s1";
    r.stage = Stage::original;
    r.source = source;
    r.verified = true;
    return r;
}

std::string fenced(const std::string& code) { return "```python\n" + code + "```\n"; }

}  // namespace

TEST_CASE("stage prompts carry their instruction anchors verbatim") {
    Problem p = fixture_problem();
    std::string solution = fixtures::oracle_fixtures()[0].correct;

    PromptSpec rename = build_rename_prompt(p, solution);
    REQUIRE(rename.user.find("descriptive, meaningful, and consistent") != std::string::npos);
    REQUIRE(rename.user.find("Do not change the original semantics of the program.") !=
            std::string::npos);
    REQUIRE(rename.user.find(p.statement) != std::string::npos);
    REQUIRE(rename.user.find(solution) != std::string::npos);
    REQUIRE(rename.user.find("```python") != std::string::npos);

    PromptSpec modularize = build_modularize_prompt(p, solution);
    REQUIRE(modularize.user.find("have an entry function called `main()`") != std::string::npos);
    REQUIRE(modularize.user.find("`main()` is called inside `if __name__ == '__main__'`") !=
            std::string::npos);
    REQUIRE(modularize.user.find("{renamed_solution}") == std::string::npos);
    REQUIRE(modularize.user.find("{problem_statement}") == std::string::npos);

    PromptSpec remodularize = build_remodularize_prompt(p, solution, {"solve", "parse"});
    REQUIRE(remodularize.user.find("breaking down long and complex functions") != std::string::npos);
    REQUIRE(remodularize.user.find("solve, parse") != std::string::npos);

    PromptSpec single = build_remodularize_prompt(p, solution, {"solve"});
    REQUIRE(single.user.find("functions - solve\n") != std::string::npos);

    PromptSpec plan = build_plan_prompt(p, solution, {"read_input", "compute", "main"});
    REQUIRE(plan.user.find("within four lines each") != std::string::npos);
    REQUIRE(plan.user.find("read_input\ncompute\nmain") != std::string::npos);

    SECTION("builders are deterministic and injective") {
        REQUIRE(build_rename_prompt(p, solution).user == rename.user);
        std::string other = fixtures::oracle_fixtures()[1].correct;
        REQUIRE(build_rename_prompt(p, other).user != rename.user);
    }
    SECTION("empty inputs violate preconditions") {
        Problem blank = p;
        blank.statement = "  ";
        REQUIRE_THROWS_AS(build_rename_prompt(blank, solution), std::invalid_argument);
        REQUIRE_THROWS_AS(build_rename_prompt(p, ""), std::invalid_argument);
        REQUIRE_THROWS_AS(build_remodularize_prompt(p, solution, {}), std::invalid_argument);
        REQUIRE_THROWS_AS(build_plan_prompt(p, solution, {}), std::invalid_argument);
    }
}

TEST_CASE("extract_code_block takes the first fence only") {
    REQUIRE(extract_code_block("```\nprint(1)\n```") == "print(1)");
    REQUIRE(extract_code_block("Sure!\n```python\nx = 1\nprint(x)\n```\nHope this helps.") ==
            "x = 1\nprint(x)");
    REQUIRE(extract_code_block("```python\nfirst\n```\n```python\nsecond\n```") == "first");

    REQUIRE_THROWS_AS(extract_code_block("no code here"), ExtractionError);
    REQUIRE_THROWS_AS(extract_code_block("```python\nnever closed"), ExtractionError);
    try {
        extract_code_block("nothing");
        FAIL("expected ExtractionError");
    } catch (const ExtractionError& e) {
        REQUIRE(e.kind == ExtractionError::Kind::no_fence_found);
    }
}

TEST_CASE("assemble_planned_program prepends a comment block reversibly") {
    std::string source = "def main():\n    print(1)\n\nmain()\n";

    SECTION("two-line plan gives exactly two comment lines before the separator") {
        std::string assembled = assemble_planned_program("read input\nprint result", source);
        auto lines = split_lines(assembled);
        REQUIRE(lines[0] == "# read input");
        REQUIRE(lines[1] == "# print result");
        REQUIRE(lines[2] == "");
        REQUIRE(strip_plan_comment(assembled) == source);
    }
    SECTION("empty plan is a precondition error") {
        REQUIRE_THROWS_AS(assemble_planned_program("  \n ", source), std::invalid_argument);
    }
    SECTION("inverse holds for plans with blank lines and comment-leading sources") {
        std::string commenty = "# already commented\n\nprint(2)\n";
        std::string assembled = assemble_planned_program("a\n\nb", commenty);
        REQUIRE(strip_plan_comment(assembled) == commenty);
    }
    SECTION("inverse holds on randomized sources") {
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 20; ++trial) {
            std::string src;
            int lines = 1 + static_cast<int>(rng() % 8);
            for (int i = 0; i < lines; ++i) {
                switch (rng() % 4) {
                    case 0: src += "x" + std::to_string(rng() % 100) + " = " + std::to_string(rng() % 100) + "\n"; break;
                    case 1: src += "\n"; break;
                    case 2: src += "print('v " + std::to_string(rng() % 100) + "')\n"; break;
                    default: src += "# trailing comment " + std::to_string(rng() % 10) + "\n"; break;
                }
            }
            std::string plan = "plan line one\nplan line " + std::to_string(trial);
            REQUIRE(strip_plan_comment(assemble_planned_program(plan, src)) == src);
        }
    }
}

TEST_CASE("run_stage verifies on the first good candidate") {
    Problem p = fixture_problem();
    TransformRecord original = original_record(p, fixtures::oracle_fixtures()[0].correct);
    TransformConfig config;
    config.model_id = "mock";

    SECTION("identical source verifies on attempt 1") {
        MockClient echo([&](const PromptSpec&, int) { return fenced(original.source); });
        StageOutcome outcome = run_stage(original, Stage::rename, p, echo, config);
        REQUIRE(outcome.status == StageStatus::verified);
        REQUIRE(outcome.attempts_used == 1);
        REQUIRE(outcome.record->verified);
        REQUIRE(outcome.record->stage == Stage::rename);
        REQUIRE(outcome.record->parent_solution_id == original.solution_id);
        REQUIRE(outcome.record->source == original.source);
    }
    SECTION("four broken attempts then a good one exhausts the budget exactly") {
        MockClient flaky([&](const PromptSpec&, int attempt) {
            return attempt < 4 ? fenced("print(999)\n") : fenced(original.source);
        });
        StageOutcome outcome = run_stage(original, Stage::rename, p, flaky, config);
        REQUIRE(outcome.status == StageStatus::verified);
        REQUIRE(outcome.attempts_used == 5);
        REQUIRE(outcome.failure_trail.size() == 4);
    }
    SECTION("an always-broken mock exhausts at exactly max_attempts") {
        MockClient broken([](const PromptSpec&, int) { return fenced("print(999)\n"); });
        StageOutcome outcome = run_stage(original, Stage::rename, p, broken, config);
        REQUIRE(outcome.status == StageStatus::exhausted);
        REQUIRE(outcome.attempts_used == 5);
        REQUIRE(outcome.failure_trail.size() == 5);
        REQUIRE_FALSE(outcome.record.has_value());
    }
    SECTION("fence-less completions are extraction failures") {
        MockClient chatty([](const PromptSpec&, int) { return "I cannot help with that."; });
        StageOutcome outcome = run_stage(original, Stage::rename, p, chatty, config);
        REQUIRE(outcome.status == StageStatus::extraction_failed);
        REQUIRE(outcome.attempts_used == 5);
    }
    SECTION("transport errors are retried within the budget") {
        int calls = 0;
        MockClient unstable([&](const PromptSpec&, int) -> std::string {
            if (++calls < 3) throw ModelTransportError("connection reset");
            return fenced(original.source);
        });
        StageOutcome outcome = run_stage(original, Stage::rename, p, unstable, config);
        REQUIRE(outcome.status == StageStatus::verified);
        REQUIRE(outcome.attempts_used == 3);
        REQUIRE(outcome.failure_trail.size() == 2);
    }
    SECTION("stage must be the successor of the record's stage") {
        MockClient echo([&](const PromptSpec&, int) { return fenced(original.source); });
        REQUIRE_THROWS_AS(run_stage(original, Stage::modular, p, echo, config),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(run_stage(original, Stage::planning, p, echo, config),
                          std::invalid_argument);
    }
}

TEST_CASE("planning stage assembles the plan as a comment block") {
    Problem p = fixture_problem();
    std::string modular_src =
        "def main():\n    a, b = map(int, input().split())\n    print(a + b)\n\nmain()\n";
    TransformRecord modular;
    modular.problem_id = p.id;
    modular.solution_id = "s1";
    modular.stage = Stage::modular;
    modular.source = modular_src;
    modular.verified = true;

    MockClient planner([](const PromptSpec& prompt, int) -> std::string {
        REQUIRE(prompt.user.find("within four lines each") != std::string::npos);
        REQUIRE(prompt.user.find("main") != std::string::npos);
        return "`main()`: reads two integers and prints their sum.";
    });
    TransformConfig config;
    config.model_id = "mock";
    StageOutcome outcome = run_stage(modular, Stage::planning, p, planner, config);
    REQUIRE(outcome.status == StageStatus::verified);
    REQUIRE(outcome.record->stage == Stage::planning);
    REQUIRE_FALSE(outcome.record->plan.empty());
    REQUIRE(strip_plan_comment(outcome.record->source) == modular_src);
    REQUIRE(outcome.record->source.substr(0, 2) == "# ");
}

namespace {

// A program whose single worker function spans exactly `lines` physical
// lines; prints a line-count-dependent constant.
std::string long_function_program(int lines) {
    std::string src = "def compute():\n    total = 0\n";
    for (int i = 0; i < lines - 3; ++i) src += "    total += 1\n";
    src += "    return total\n";
    src += "\ndef main():\n    print(compute())\n\nmain()\n";
    return src;
}

Problem long_function_problem(int lines) {
    Problem p;
    p.id = "longfn";
    p.platform = "codeforces";
    p.statement = "Print the constant.";
    p.tests.inputs = {"\n"};
    p.tests.expected_outputs = {std::to_string(lines - 3) + "\n"};
    return p;
}

}  // namespace

TEST_CASE("second-round modularization triggers strictly above 20 lines") {
    TransformConfig config;
    config.model_id = "mock";

    SECTION("a 20-line function is returned unchanged") {
        Problem p = long_function_problem(20);
        TransformRecord record;
        record.problem_id = p.id;
        record.solution_id = "s1";
        record.stage = Stage::modular;
        record.source = long_function_program(20);
        record.verified = true;
        auto fns = parse_functions(record.source).functions;
        REQUIRE(fns[0].line_count == 20);

        bool called = false;
        MockClient mock([&](const PromptSpec&, int) -> std::string {
            called = true;
            return fenced(record.source);
        });
        StageOutcome outcome = detect_and_remodularize(record, p, mock, config);
        REQUIRE(outcome.status == StageStatus::verified);
        REQUIRE_FALSE(called);
        REQUIRE(outcome.attempts_used == 0);
        REQUIRE(outcome.record->source == record.source);
    }
    SECTION("a 21-line function invokes the second round") {
        Problem p = long_function_problem(21);
        TransformRecord record;
        record.problem_id = p.id;
        record.solution_id = "s1";
        record.stage = Stage::modular;
        record.source = long_function_program(21);
        record.verified = true;
        auto fns = parse_functions(record.source).functions;
        REQUIRE(fns[0].line_count == 21);

        std::string decomposed =
            "def add_nine():\n    return 9\n\ndef add_rest():\n    return 9\n\n"
            "def compute():\n    return add_nine() + add_rest()\n\n"
            "def main():\n    print(compute())\n\nmain()\n";
        bool saw_function_name = false;
        MockClient mock([&](const PromptSpec& prompt, int) -> std::string {
            saw_function_name = prompt.user.find("decompose the following function(s) into smaller "
                                                 "helper functions - compute") != std::string::npos;
            return fenced(decomposed);
        });
        StageOutcome outcome = detect_and_remodularize(record, p, mock, config);
        REQUIRE(outcome.status == StageStatus::verified);
        REQUIRE(saw_function_name);
        REQUIRE(outcome.record->source == decomposed);
        REQUIRE(outcome.record->attempts_used == record.attempts_used + 1);
    }
    SECTION("a failing second round keeps the verified first-round record") {
        Problem p = long_function_problem(21);
        TransformRecord record;
        record.problem_id = p.id;
        record.solution_id = "s1";
        record.stage = Stage::modular;
        record.source = long_function_program(21);
        record.verified = true;

        MockClient broken([](const PromptSpec&, int) { return fenced("print('wrong')\n"); });
        StageOutcome outcome = detect_and_remodularize(record, p, broken, config);
        REQUIRE(outcome.status == StageStatus::verified);
        REQUIRE(outcome.record->source == record.source);
        REQUIRE(outcome.failure_trail.size() == 5);
    }
}

TEST_CASE("generate_distill issues 3x8 completions and keeps only passing, distinct programs") {
    Problem p = fixture_problem();  // add task
    std::string correct = fixtures::oracle_fixtures()[0].correct;
    std::vector<FewShotSet> bank = {
        {{"ex1 statement", "def main():\n    print(1)\n\nmain()\n"},
         {"ex2 statement", "def main():\n    print(2)\n\nmain()\n"}},
        {{"ex3 statement", "def main():\n    print(3)\n\nmain()\n"},
         {"ex4 statement", "def main():\n    print(4)\n\nmain()\n"}},
        {{"ex5 statement", "def main():\n    print(5)\n\nmain()\n"},
         {"ex6 statement", "def main():\n    print(6)\n\nmain()\n"}},
    };
    DistillConfig config;
    config.model_id = "mock";

    SECTION("24 copies of one correct program collapse to a single solution") {
        MockClient mock([&](const PromptSpec&, int) { return fenced(correct); });
        auto kept = generate_distill(p, bank, mock, config);
        REQUIRE(mock.completions_issued() == 24);
        REQUIRE(kept.size() == 1);
        REQUIRE(kept[0].source == correct);
        REQUIRE(kept[0].verified == VerifyState::pass);
    }
    SECTION("all-incorrect programs yield an empty list") {
        MockClient mock([](const PromptSpec&, int) { return fenced("print('nope')\n"); });
        auto kept = generate_distill(p, bank, mock, config);
        REQUIRE(mock.completions_issued() == 24);
        REQUIRE(kept.empty());
    }
    SECTION("few-shot prompts frame examples as QUESTION/ANSWER") {
        std::string captured;
        MockClient mock([&](const PromptSpec& prompt, int) {
            captured = prompt.user;
            return fenced(correct);
        });
        generate_distill(p, bank, mock, config);
        REQUIRE(captured.find("QUESTION:\nex5 statement") != std::string::npos);
        REQUIRE(captured.find("ANSWER:\n```python\n") != std::string::npos);
        REQUIRE(captured.rfind("ANSWER:\n") == captured.size() - 8);
    }
    SECTION("the bank must hold exactly three two-shot sets") {
        MockClient mock([&](const PromptSpec&, int) { return fenced(correct); });
        REQUIRE_THROWS_AS(generate_distill(p, {bank[0]}, mock, config), std::invalid_argument);
        std::vector<FewShotSet> lopsided = bank;
        lopsided[1].pop_back();
        REQUIRE_THROWS_AS(generate_distill(p, lopsided, mock, config), std::invalid_argument);
    }
}

TEST_CASE("run_pipeline produces stage-partitioned records with independent failures") {
    Dataset ds = fixtures::five_problem_dataset();
    TransformConfig config;
    config.model_id = "mock";

    SECTION("echo mock carries all five chains to planning, deterministically") {
        auto run_once = [&] {
            auto mock = MockClient::echo();
            return run_pipeline(ds, *mock, config);
        };
        PipelineResult a = run_once();
        REQUIRE(a.by_stage[Stage::original].size() == 5);
        REQUIRE(a.by_stage[Stage::rename].size() == 5);
        REQUIRE(a.by_stage[Stage::modular].size() == 5);
        REQUIRE(a.by_stage[Stage::planning].size() == 5);
        REQUIRE(a.counters[Stage::rename].success_rate() == 1.0);

        PipelineResult b = run_once();
        for (Stage stage : all_stages()) {
            REQUIRE(a.by_stage[stage].size() == b.by_stage[stage].size());
            for (size_t i = 0; i < a.by_stage[stage].size(); ++i) {
                REQUIRE(a.by_stage[stage][i].source == b.by_stage[stage][i].source);
                REQUIRE(a.by_stage[stage][i].solution_id == b.by_stage[stage][i].solution_id);
            }
        }
    }
    SECTION("breaking modularization for one record leaves the other stages intact") {
        // The mock refuses to modularize problem p3's chain.
        MockClient mock([&](const PromptSpec& prompt, int attempt) -> std::string {
            bool is_modularize = prompt.user.find("entry function called") != std::string::npos;
            bool is_p3 = prompt.user.find("'sum_list'") != std::string::npos;
            if (is_modularize && is_p3) return fenced("print('broken')\n");
            return echo_completion(prompt, attempt);
        });
        PipelineResult result = run_pipeline(ds, mock, config);
        REQUIRE(result.by_stage[Stage::rename].size() == 5);
        REQUIRE(result.by_stage[Stage::modular].size() == 4);
        REQUIRE(result.by_stage[Stage::planning].size() == 4);
        REQUIRE(result.counters[Stage::modular].attempted == 5);
        REQUIRE(result.counters[Stage::modular].verified == 4);
        REQUIRE(result.counters[Stage::modular].success_rate() == Catch::Approx(0.8));
        REQUIRE_FALSE(result.failures.empty());
    }
    SECTION("emitted records re-verify under the equivalence oracle") {
        auto mock = MockClient::echo();
        PipelineResult result = run_pipeline(ds, *mock, config);
        std::map<std::string, const TransformRecord*> originals;
        for (const auto& r : result.by_stage[Stage::original]) originals[r.solution_id] = &r;
        std::map<std::string, const TransformRecord*> modular;
        for (const auto& r : result.by_stage[Stage::modular]) {
            REQUIRE(r.verified);
            const Problem* p = ds.find_problem(r.problem_id);
            EquivalenceReport again =
                check_equivalence(originals.at(*r.parent_solution_id)->source, r.source, p->tests,
                                  EquivalenceMode::reference_program, config.oracle);
            REQUIRE(again.equivalent);
            modular[r.solution_id] = &r;
        }
        // Chain integrity: planning source minus its comment block is the
        // parent modular source, byte-exact.
        for (const auto& r : result.by_stage[Stage::planning])
            REQUIRE(strip_plan_comment(r.source) == modular.at(*r.parent_solution_id)->source);
    }
    SECTION("parallel execution returns the same records as sequential") {
        auto mock_seq = MockClient::echo();
        PipelineResult seq = run_pipeline(ds, *mock_seq, config);
        TransformConfig parallel = config;
        parallel.jobs = 4;
        auto mock_par = MockClient::echo();
        PipelineResult par = run_pipeline(ds, *mock_par, parallel);
        for (Stage stage : all_stages()) {
            REQUIRE(seq.by_stage[stage].size() == par.by_stage[stage].size());
            for (size_t i = 0; i < seq.by_stage[stage].size(); ++i)
                REQUIRE(seq.by_stage[stage][i].source == par.by_stage[stage][i].source);
        }
    }
}

TEST_CASE("model-call cache replays responses and records fixtures") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("codeclean-cache-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    auto cache = std::make_shared<CallCache>(dir / "cache");

    PromptSpec prompt;
    prompt.user = "QUESTION: test prompt";
    prompt.model_id = "mock";
    prompt.temperature = 0.3;

    SECTION("second call is served from cache without touching the backend") {
        int backend_calls = 0;
        CachingClient client(cache, std::make_unique<MockClient>([&](const PromptSpec&, int) {
                                 ++backend_calls;
                                 return std::string("response-a");
                             }));
        REQUIRE(client.complete(prompt, 0) == "response-a");
        REQUIRE(client.complete(prompt, 0) == "response-a");
        REQUIRE(backend_calls == 1);
        REQUIRE(client.cache_hits() == 1);
        REQUIRE(client.cache_misses() == 1);
    }
    SECTION("attempt index participates in the key") {
        CachingClient client(cache, std::make_unique<MockClient>([](const PromptSpec&, int attempt) {
                                 return "attempt-" + std::to_string(attempt);
                             }));
        REQUIRE(client.complete(prompt, 0) == "attempt-0");
        REQUIRE(client.complete(prompt, 1) == "attempt-1");
        REQUIRE(model_call_key(prompt, 0) != model_call_key(prompt, 1));
    }
    SECTION("fixture mode replays and reports misses as transport errors") {
        {
            CachingClient recorder(cache, std::make_unique<MockClient>([](const PromptSpec&, int) {
                                       return std::string("recorded");
                                   }));
            recorder.complete(prompt, 0);
        }
        CachingClient replay(cache, nullptr);
        REQUIRE(replay.complete(prompt, 0) == "recorded");
        PromptSpec other = prompt;
        other.user = "unseen";
        REQUIRE_THROWS_AS(replay.complete(other, 0), ModelTransportError);
    }
    fs::remove_all(dir);
}
