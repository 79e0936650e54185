#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include "codeclean/oracle.hpp"
#include "fixtures.hpp"

using namespace codeclean;

TEST_CASE("compare_outputs default policy") {
    // Normalization: rstrip each line, drop trailing blank lines, exact match.
    REQUIRE(compare_outputs("5 \n", "5\n"));
    REQUIRE(compare_outputs("1\n2\n", "1\n2"));
    REQUIRE(compare_outputs("1\n2\n\n\n", "1\n2"));
    REQUIRE_FALSE(compare_outputs("1 2", "2 1"));
    REQUIRE_FALSE(compare_outputs("1\n\n2", "1\n2"));  // interior blank is significant
    REQUIRE(compare_outputs("", "\n"));

    SECTION("opt-in float tolerance") {
        OutputPolicy floats;
        floats.float_mode = true;
        REQUIRE(compare_outputs("0.3333333\n", "0.3333334\n", floats));
        REQUIRE_FALSE(compare_outputs("0.3333333\n", "0.3343334\n", floats));
        REQUIRE(compare_outputs("ans 1.0\n", "ans 1.0000001\n", floats));
        REQUIRE_FALSE(compare_outputs("ans 1.0\n", "ans\n", floats));
        // Disabled by default: textual mismatch stays a mismatch.
        REQUIRE_FALSE(compare_outputs("1.0\n", "1.00\n"));
    }
}

TEST_CASE("run_program feeds stdin and captures stdout") {
    ResourceLimits limits;
    ExecutionResult r = run_program("print(input())", "5\n", limits);
    REQUIRE(r.verdict == Verdict::pass);
    REQUIRE(r.stdout_text == "5\n");
    REQUIRE(r.exit_code == 0);
}

TEST_CASE("run_program classifies timeouts") {
    ResourceLimits limits;
    limits.wall_time_s = 2.0;
    ExecutionResult r = run_program("while True: pass", "", limits);
    REQUIRE(r.verdict == Verdict::timeout);
    REQUIRE(r.wall_time_s >= 1.5);
    REQUIRE(r.wall_time_s <= 2.5);
}

TEST_CASE("run_program classifies runtime errors") {
    ResourceLimits limits;
    ExecutionResult r = run_program("x = 1 // 0\n", "", limits);
    REQUIRE(r.verdict == Verdict::runtime_error);
    REQUIRE(r.exit_code != 0);
    REQUIRE(r.stderr_text.find("ZeroDivisionError") != std::string::npos);
}

TEST_CASE("run_program classifies memory exhaustion") {
    ResourceLimits limits;
    limits.memory_bytes = 256ull * 1024 * 1024;
    ExecutionResult r = run_program("data = [0] * (1 << 30)\nprint(len(data))", "", limits);
    REQUIRE(r.verdict == Verdict::memory_exceeded);
}

TEST_CASE("run_program truncates runaway output") {
    ResourceLimits limits;
    limits.max_output_bytes = 1 << 16;
    ExecutionResult r = run_program("while True:\n    print('x' * 4096)", "", limits);
    REQUIRE(r.verdict == Verdict::output_truncated);
    REQUIRE(r.stdout_text.size() <= limits.max_output_bytes);
}

TEST_CASE("run_program reports harness faults as sandbox_error") {
    ResourceLimits limits;
    ExecutionResult r = run_program("print(1)", "", limits, "definitely-not-an-interpreter");
    REQUIRE(r.verdict == Verdict::sandbox_error);
}

TEST_CASE("concurrent runs are isolated from each other") {
    // Each program writes a sentinel into its cwd, waits, then lists the cwd.
    auto lister = [](const std::string& tag) {
        return "import os, time\n"
               "open('sentinel_" + tag + "', 'w').write('x')\n"
               "time.sleep(0.5)\n"
               "print(','.join(sorted(f for f in os.listdir('.') if f.startswith('sentinel'))))\n";
    };
    ResourceLimits limits;
    ExecutionResult ra, rb;
    std::thread ta([&] { ra = run_program(lister("a"), "", limits); });
    std::thread tb([&] { rb = run_program(lister("b"), "", limits); });
    ta.join();
    tb.join();
    REQUIRE(ra.verdict == Verdict::pass);
    REQUIRE(rb.verdict == Verdict::pass);
    REQUIRE(ra.stdout_text == "sentinel_a\n");
    REQUIRE(rb.stdout_text == "sentinel_b\n");
}

TEST_CASE("check_solution requires every test to pass") {
    OracleConfig config;
    TestSuite tests;
    tests.inputs = {"3 4\n", "1 2\n", "10 20\n"};
    tests.expected_outputs = {"7\n", "3\n", "30\n"};
    std::string correct = "a, b = map(int, input().split())\nprint(a + b)\n";

    SECTION("correct solution passes all tests") {
        SolutionCheck check = check_solution(correct, tests, config);
        REQUIRE(check.overall);
        REQUIRE(check.per_test == std::vector<Verdict>{Verdict::pass, Verdict::pass, Verdict::pass});
    }
    SECTION("an off-by-one mutant records wrong_output") {
        std::string mutant = "a, b = map(int, input().split())\nprint(a + b + (1 if a == 1 else 0))\n";
        SolutionCheck check = check_solution(mutant, tests, config);
        REQUIRE_FALSE(check.overall);
        REQUIRE(std::find(check.per_test.begin(), check.per_test.end(), Verdict::wrong_output) !=
                check.per_test.end());
    }
    SECTION("empty test suite violates the precondition") {
        REQUIRE_THROWS_AS(check_solution(correct, TestSuite{}, config), std::invalid_argument);
    }
}

TEST_CASE("check_equivalence is reflexive for deterministic programs") {
    OracleConfig config;
    const auto& fx = fixtures::oracle_fixtures()[0];
    for (EquivalenceMode mode : {EquivalenceMode::expected_output, EquivalenceMode::reference_program}) {
        EquivalenceReport report = check_equivalence(fx.correct, fx.correct, fx.tests, mode, config);
        REQUIRE(report.equivalent);
    }
}

TEST_CASE("multi-answer fixture passes reference mode but fails expected mode") {
    OracleConfig config;
    Problem p = fixtures::multi_answer_problem();
    std::string transformed =
        "first, second = input().split()\nprint(second, first)\n";  // renamed variant of the reference

    EquivalenceReport ref = check_equivalence(p.reference_solutions[0], transformed, p.tests,
                                              EquivalenceMode::reference_program, config);
    REQUIRE(ref.equivalent);

    EquivalenceReport expected = check_equivalence(p.reference_solutions[0], transformed, p.tests,
                                                   EquivalenceMode::expected_output, config);
    REQUIRE_FALSE(expected.equivalent);
}

TEST_CASE("check_equivalence rejects a transformed program with an introduced bug") {
    OracleConfig config;
    const auto& fx = fixtures::oracle_fixtures()[0];  // add
    EquivalenceReport report = check_equivalence(
        fx.correct, fx.mutant, fx.tests, EquivalenceMode::reference_program, config);
    REQUIRE_FALSE(report.equivalent);
}

TEST_CASE("reference mode skips inputs where the reference fails") {
    OracleConfig config;
    // Reference crashes on input "0" but works elsewhere.
    std::string reference = "n = int(input())\nprint(10 // n)\n";
    std::string transformed = "n = int(input())\nprint(10 // n if n else 'zero')\n";
    TestSuite tests;
    tests.inputs = {"0\n", "5\n"};
    tests.expected_outputs = {"ignored\n", "2\n"};

    EquivalenceReport report =
        check_equivalence(reference, transformed, tests, EquivalenceMode::reference_program, config);
    REQUIRE(report.equivalent);
    REQUIRE(report.per_test.size() == 2);
    REQUIRE(report.per_test[0].skipped);
    REQUIRE_FALSE(report.per_test[1].skipped);

    SECTION("an unusable reference is an error") {
        TestSuite bad;
        bad.inputs = {"0\n"};
        bad.expected_outputs = {"x\n"};
        REQUIRE_THROWS_WITH(
            check_equivalence(reference, transformed, bad, EquivalenceMode::reference_program, config),
            Catch::Matchers::ContainsSubstring("reference program unusable"));
    }
}

TEST_CASE("oracle verifier binding handles plain and multi-answer problems") {
    OracleConfig config;
    SolutionVerifier verify = make_oracle_verifier(config);

    Problem plain;
    plain.id = "plain";
    plain.tests.inputs = {"abba\n"};
    plain.tests.expected_outputs = {"YES\n"};
    Solution good{"plain", "s1", "s = input()\nprint('YES' if s == s[::-1] else 'NO')\n"};
    Solution bad{"plain", "s2", "s = input()\nraise RuntimeError('boom')\n"};
    REQUIRE(verify(plain, good));
    REQUIRE_FALSE(verify(plain, bad));

    Problem multi = fixtures::multi_answer_problem();
    Solution reversed{"pair-any-order", "s3", "x, y = input().split()\nprint(y, x)\n"};
    REQUIRE(verify(multi, reversed));
}
