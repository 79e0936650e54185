#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "codeclean/dataset.hpp"
#include "codeclean/sandbox.hpp"

namespace codeclean {

struct OutputPolicy {
    // Default judging: line-wise, trailing-whitespace- and trailing-blank-
    // insensitive, otherwise exact. Float tolerance is an opt-in escape
    // hatch for numeric judges.
    bool float_mode = false;
    double float_rel_eps = 1e-6;
};

namespace detail {

inline std::vector<std::string> normalized_lines(const std::string& text) {
    std::vector<std::string> lines = split_lines(text);
    for (auto& line : lines) line = rstrip(line);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

inline bool float_tokens_match(const std::string& a, const std::string& b, double rel_eps) {
    std::istringstream sa(a), sb(b);
    std::string ta, tb;
    while (true) {
        bool ha = static_cast<bool>(sa >> ta), hb = static_cast<bool>(sb >> tb);
        if (ha != hb) return false;
        if (!ha) return true;
        if (ta == tb) continue;
        try {
            size_t pa = 0, pb = 0;
            double va = std::stod(ta, &pa), vb = std::stod(tb, &pb);
            if (pa != ta.size() || pb != tb.size()) return false;
            double scale = std::max({1.0, std::fabs(va), std::fabs(vb)});
            if (std::fabs(va - vb) > rel_eps * scale) return false;
        } catch (...) {
            return false;
        }
    }
}

}  // namespace detail

inline bool compare_outputs(const std::string& actual, const std::string& expected,
                            const OutputPolicy& policy = {}) {
    auto a = detail::normalized_lines(actual);
    auto e = detail::normalized_lines(expected);
    if (policy.float_mode)
        return detail::float_tokens_match(join(a, "\n"), join(e, "\n"), policy.float_rel_eps);
    return a == e;
}

struct OracleConfig {
    ResourceLimits limits;
    OutputPolicy policy;
    std::string interpreter_cmd = "python3";
    std::filesystem::path scratch_root = default_scratch_root();
};

struct SandboxError : std::runtime_error {
    int test_index;
    explicit SandboxError(int index, const std::string& detail)
        : std::runtime_error("sandbox error at test " + std::to_string(index) + ": " + detail),
          test_index(index) {}
};

struct SolutionCheck {
    bool overall = false;
    std::vector<Verdict> per_test;  // verdicts for all executed tests
};

// Strict functional correctness of one program against a test suite.
// Short-circuits on the first failing test; harness faults abort with the
// failing test index, program faults are verdicts.
inline SolutionCheck check_solution(const std::string& source, const TestSuite& tests,
                                    const OracleConfig& config = {}) {
    if (tests.empty()) throw std::invalid_argument("check_solution: empty test suite");
    SolutionCheck check;
    check.overall = true;
    for (size_t i = 0; i < tests.size(); ++i) {
        ExecutionResult run = run_program(source, tests.inputs[i], config.limits,
                                          config.interpreter_cmd, config.scratch_root);
        if (run.verdict == Verdict::sandbox_error)
            throw SandboxError(static_cast<int>(i), run.stderr_text);
        Verdict v = run.verdict;
        if (v == Verdict::pass &&
            !compare_outputs(run.stdout_text, tests.expected_outputs[i], config.policy))
            v = Verdict::wrong_output;
        check.per_test.push_back(v);
        if (v != Verdict::pass) {
            check.overall = false;
            break;
        }
    }
    return check;
}

enum class EquivalenceMode { expected_output, reference_program };

inline const char* to_string(EquivalenceMode m) {
    return m == EquivalenceMode::expected_output ? "expected_output" : "reference_program";
}

struct TestComparison {
    Verdict transformed = Verdict::pass;
    Verdict reference = Verdict::pass;
    bool skipped = false;  // reference itself failed on this input
};

struct EquivalenceReport {
    bool equivalent = false;
    std::vector<TestComparison> per_test;
    EquivalenceMode mode = EquivalenceMode::expected_output;
};

// The functional-equivalence check gating every transformation. In
// expected_output mode the transformed program must pass the suite's
// expected outputs. In reference_program mode the original program's outputs
// define the expectation per input; inputs where the original itself fails
// are skipped, and at least one usable input must remain.
inline EquivalenceReport check_equivalence(const std::string& original, const std::string& transformed,
                                           const TestSuite& tests, EquivalenceMode mode,
                                           const OracleConfig& config = {}) {
    if (tests.empty()) throw std::invalid_argument("check_equivalence: empty test suite");
    EquivalenceReport report;
    report.mode = mode;

    if (mode == EquivalenceMode::expected_output) {
        report.equivalent = true;
        for (size_t i = 0; i < tests.size(); ++i) {
            ExecutionResult run = run_program(transformed, tests.inputs[i], config.limits,
                                              config.interpreter_cmd, config.scratch_root);
            if (run.verdict == Verdict::sandbox_error)
                throw SandboxError(static_cast<int>(i), run.stderr_text);
            TestComparison cmp;
            cmp.transformed = run.verdict;
            if (cmp.transformed == Verdict::pass &&
                !compare_outputs(run.stdout_text, tests.expected_outputs[i], config.policy))
                cmp.transformed = Verdict::wrong_output;
            report.per_test.push_back(cmp);
            if (cmp.transformed != Verdict::pass) {
                report.equivalent = false;
                break;
            }
        }
        return report;
    }

    size_t usable = 0;
    bool all_match = true;
    for (size_t i = 0; i < tests.size(); ++i) {
        ExecutionResult ref = run_program(original, tests.inputs[i], config.limits,
                                          config.interpreter_cmd, config.scratch_root);
        if (ref.verdict == Verdict::sandbox_error)
            throw SandboxError(static_cast<int>(i), ref.stderr_text);
        TestComparison cmp;
        cmp.reference = ref.verdict;
        if (ref.verdict != Verdict::pass) {
            cmp.skipped = true;
            report.per_test.push_back(cmp);
            continue;
        }
        ++usable;
        ExecutionResult run = run_program(transformed, tests.inputs[i], config.limits,
                                          config.interpreter_cmd, config.scratch_root);
        if (run.verdict == Verdict::sandbox_error)
            throw SandboxError(static_cast<int>(i), run.stderr_text);
        cmp.transformed = run.verdict;
        if (cmp.transformed == Verdict::pass &&
            !compare_outputs(run.stdout_text, ref.stdout_text, config.policy))
            cmp.transformed = Verdict::wrong_output;
        report.per_test.push_back(cmp);
        if (cmp.transformed != Verdict::pass) all_match = false;
    }
    if (usable == 0) throw std::runtime_error("check_equivalence: reference program unusable");
    report.equivalent = all_match;
    return report;
}

// dataset-core binding: verify one solution against its problem, switching
// to reference mode for multi-answer problems that carry a reference program.
inline SolutionVerifier make_oracle_verifier(const OracleConfig& config) {
    return [config](const Problem& problem, const Solution& solution) {
        if (problem.tests.empty()) return false;
        try {
            if (problem.multi_answer && !problem.reference_solutions.empty()) {
                EquivalenceReport report =
                    check_equivalence(problem.reference_solutions.front(), solution.source,
                                      problem.tests, EquivalenceMode::reference_program, config);
                return report.equivalent;
            }
            return check_solution(solution.source, problem.tests, config).overall;
        } catch (const SandboxError&) {
            throw;  // harness faults propagate, per-solution failures are data
        } catch (const std::runtime_error&) {
            return false;
        }
    };
}

}  // namespace codeclean
