#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "codeclean/code_analysis.hpp"
#include "codeclean/dataset.hpp"
#include "codeclean/model_client.hpp"
#include "codeclean/oracle.hpp"
#include "codeclean/prompts.hpp"

namespace codeclean {

struct TransformConfig {
    int max_attempts = 5;
    double temperature = 0.3;
    std::string model_id = "gpt-3.5-turbo";
    int long_function_line_threshold = 20;
    EquivalenceMode mode = EquivalenceMode::reference_program;
    OracleConfig oracle;
    PromptTemplates templates;
    int jobs = 1;
    Stage final_stage = Stage::planning;  // chains stop after this stage
};

struct DistillConfig {
    int fewshot_sets = 3;
    int per_prompt = 8;
    double temperature = 0.5;
    std::string model_id = "gpt-3.5-turbo";
    int max_attempts = 5;
    OracleConfig oracle;
};

enum class StageStatus { verified, exhausted, extraction_failed };

inline const char* to_string(StageStatus s) {
    switch (s) {
        case StageStatus::verified: return "verified";
        case StageStatus::exhausted: return "exhausted";
        case StageStatus::extraction_failed: return "extraction_failed";
    }
    return "exhausted";
}

struct AttemptFailure {
    int attempt = 0;  // 1-based
    std::string reason;
};

struct StageOutcome {
    StageStatus status = StageStatus::exhausted;
    std::optional<TransformRecord> record;
    int attempts_used = 0;
    std::vector<AttemptFailure> failure_trail;
};

// Plan text becomes a leading comment block: '# ' before each line ('#' for
// empty ones), one blank separator line, then the program unchanged.
inline std::string assemble_planned_program(const std::string& plan_text,
                                            const std::string& modularized_source) {
    if (strip(plan_text).empty())
        throw std::invalid_argument("assemble_planned_program: empty plan");
    std::string out;
    for (const auto& line : split_lines(rstrip(plan_text)))
        out += line.empty() ? "#\n" : "# " + line + "\n";
    out += "\n";
    out += modularized_source;
    return out;
}

// Inverse of assemble_planned_program: drops the leading comment block and
// the single blank separator.
inline std::string strip_plan_comment(const std::string& planned_source) {
    auto lines = split_lines(planned_source);
    size_t i = 0;
    while (i < lines.size() && !lines[i].empty() && lines[i][0] == '#') ++i;
    if (i < lines.size() && lines[i].empty()) ++i;
    std::string out;
    for (size_t j = i; j < lines.size(); ++j) {
        out += lines[j];
        if (j + 1 < lines.size()) out += '\n';
    }
    return out;
}

inline Stage next_stage(Stage s) {
    switch (s) {
        case Stage::original: return Stage::rename;
        case Stage::rename: return Stage::modular;
        case Stage::modular: return Stage::planning;
        default: throw std::invalid_argument("no successor stage");
    }
}

namespace detail {

inline std::vector<std::string> function_names(const std::string& source) {
    std::vector<std::string> names;
    for (const auto& fn : parse_functions(source).functions) names.push_back(fn.name);
    return names;
}

inline std::vector<std::string> long_function_names(const std::string& source, int threshold) {
    std::vector<std::string> names;
    for (const auto& fn : parse_functions(source).functions)
        if (fn.line_count > threshold) names.push_back(fn.name);
    return names;
}

}  // namespace detail

// One oracle-gated stage: build the stage prompt, sample the model, extract,
// verify against the parent source, retry within the budget. The first
// verified candidate wins; transport and extraction failures burn an attempt
// and are recorded in the failure trail.
inline StageOutcome run_stage(const TransformRecord& record, Stage stage, const Problem& problem,
                              ModelClient& model, const TransformConfig& config) {
    if (stage != next_stage(record.stage))
        throw std::invalid_argument("run_stage: stage is not the successor of the record's stage");

    StageOutcome outcome;
    if (stage == Stage::planning && detail::function_names(record.source).empty()) {
        // Nothing to summarize; retrying cannot change the parse.
        outcome.failure_trail.push_back({0, "planning: program has no functions to summarize"});
        return outcome;
    }
    bool any_extraction_succeeded = false;
    for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
        outcome.attempts_used = attempt;
        try {
            PromptSpec prompt;
            switch (stage) {
                case Stage::rename:
                    prompt = build_rename_prompt(problem, record.source, config.templates);
                    break;
                case Stage::modular:
                    prompt = build_modularize_prompt(problem, record.source, config.templates);
                    break;
                case Stage::planning: {
                    auto names = detail::function_names(record.source);
                    prompt = build_plan_prompt(problem, record.source, names, config.templates);
                    break;
                }
                default: throw std::invalid_argument("run_stage: not a transform stage");
            }
            prompt.temperature = config.temperature;
            prompt.max_attempts = config.max_attempts;
            prompt.model_id = config.model_id;

            std::string completion = model.complete(prompt, attempt - 1);

            std::string candidate;
            std::string plan;
            if (stage == Stage::planning) {
                plan = strip(completion);
                if (plan.empty()) throw ExtractionError(ExtractionError::Kind::no_fence_found);
                candidate = assemble_planned_program(plan, record.source);
            } else {
                candidate = extract_code_block(completion);
                if (!candidate.empty() && candidate.back() != '\n') candidate += '\n';
            }
            any_extraction_succeeded = true;

            EquivalenceReport report =
                check_equivalence(record.source, candidate, problem.tests, config.mode, config.oracle);
            if (!report.equivalent) {
                outcome.failure_trail.push_back({attempt, "oracle rejected candidate"});
                continue;
            }

            TransformRecord out;
            out.problem_id = record.problem_id;
            out.solution_id = record.solution_id;
            out.stage = stage;
            out.source = candidate;
            out.plan = plan;
            out.parent_solution_id = record.solution_id;
            out.attempts_used = attempt;
            out.verified = true;
            out.model_id = config.model_id;
            outcome.status = StageStatus::verified;
            outcome.record = std::move(out);
            return outcome;
        } catch (const ExtractionError& e) {
            outcome.failure_trail.push_back({attempt, e.what()});
        } catch (const ModelTransportError& e) {
            outcome.failure_trail.push_back({attempt, std::string("transport: ") + e.what()});
        } catch (const std::runtime_error& e) {
            outcome.failure_trail.push_back({attempt, e.what()});
        }
    }
    outcome.status =
        any_extraction_succeeded ? StageStatus::exhausted : StageStatus::extraction_failed;
    return outcome;
}

// Second modularization round, triggered only when some function body runs
// past the line threshold. On failure the verified first-round record is
// kept; at most this one extra round is attempted.
inline StageOutcome detect_and_remodularize(const TransformRecord& record, const Problem& problem,
                                            ModelClient& model, const TransformConfig& config) {
    if (record.stage != Stage::modular || !record.verified)
        throw std::invalid_argument("detect_and_remodularize: requires a verified modular record");

    StageOutcome outcome;
    auto long_names =
        detail::long_function_names(record.source, config.long_function_line_threshold);
    if (long_names.empty()) {
        outcome.status = StageStatus::verified;
        outcome.record = record;
        outcome.attempts_used = 0;
        return outcome;
    }

    for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
        outcome.attempts_used = attempt;
        try {
            PromptSpec prompt =
                build_remodularize_prompt(problem, record.source, long_names, config.templates);
            prompt.temperature = config.temperature;
            prompt.max_attempts = config.max_attempts;
            prompt.model_id = config.model_id;

            std::string completion = model.complete(prompt, attempt - 1);
            std::string candidate = extract_code_block(completion);
            if (!candidate.empty() && candidate.back() != '\n') candidate += '\n';

            EquivalenceReport report =
                check_equivalence(record.source, candidate, problem.tests, config.mode, config.oracle);
            if (!report.equivalent) {
                outcome.failure_trail.push_back({attempt, "oracle rejected candidate"});
                continue;
            }

            TransformRecord out = record;
            out.source = candidate;
            out.attempts_used = record.attempts_used + attempt;
            outcome.status = StageStatus::verified;
            outcome.record = std::move(out);
            return outcome;
        } catch (const std::runtime_error& e) {
            outcome.failure_trail.push_back({attempt, e.what()});
        }
    }
    // Keep the verified first-round result.
    outcome.status = StageStatus::verified;
    outcome.record = record;
    return outcome;
}

struct FewShotExample {
    std::string statement;
    std::string solution;
};
using FewShotSet = std::vector<FewShotExample>;  // two examples per set

inline std::string build_distill_prompt(const Problem& problem, const FewShotSet& examples) {
    std::string user;
    for (const auto& ex : examples) {
        user += "QUESTION:\n" + ex.statement + "\n\nANSWER:\n```python\n" + ex.solution + "\n```\n\n";
    }
    user += "QUESTION:\n" + problem.statement + "\n\nANSWER:\n";
    return user;
}

// Direct generation baseline: three distinct two-shot prompts, eight samples
// each, filtered by the problem's ground-truth tests, deduplicated byte-wise.
inline std::vector<Solution> generate_distill(const Problem& problem,
                                              const std::vector<FewShotSet>& fewshot_bank,
                                              ModelClient& model, const DistillConfig& config,
                                              std::vector<AttemptFailure>* failures = nullptr) {
    if (fewshot_bank.size() != static_cast<size_t>(config.fewshot_sets))
        throw std::invalid_argument("generate_distill: fewshot bank must have exactly " +
                                    std::to_string(config.fewshot_sets) + " example sets");
    for (const auto& set : fewshot_bank)
        if (set.size() != 2)
            throw std::invalid_argument("generate_distill: each few-shot set holds two examples");

    std::vector<Solution> kept;
    std::set<std::string> seen;
    int sample_counter = 0;
    for (size_t set_idx = 0; set_idx < fewshot_bank.size(); ++set_idx) {
        PromptSpec prompt;
        prompt.user = build_distill_prompt(problem, fewshot_bank[set_idx]);
        prompt.temperature = config.temperature;
        prompt.max_attempts = config.max_attempts;
        prompt.model_id = config.model_id;
        for (int s = 0; s < config.per_prompt; ++s) {
            ++sample_counter;
            try {
                std::string completion = model.complete(prompt, s);
                std::string candidate = extract_code_block(completion);
                if (!candidate.empty() && candidate.back() != '\n') candidate += '\n';
                if (!check_solution(candidate, problem.tests, config.oracle).overall) continue;
                if (!seen.insert(candidate).second) continue;
                Solution sol;
                sol.problem_id = problem.id;
                sol.solution_id = problem.id + "-distill-" + std::to_string(kept.size());
                sol.source = candidate;
                sol.verified = VerifyState::pass;
                kept.push_back(std::move(sol));
            } catch (const std::runtime_error& e) {
                if (failures) failures->push_back({sample_counter, e.what()});
            }
        }
    }
    return kept;
}

struct StageCounters {
    size_t attempted = 0;
    size_t verified = 0;

    double success_rate() const {
        return attempted == 0 ? 0.0 : static_cast<double>(verified) / attempted;
    }
};

struct PipelineResult {
    std::map<Stage, std::vector<TransformRecord>> by_stage;
    std::map<Stage, StageCounters> counters;
    std::vector<AttemptFailure> failures;  // attempt field is the solution index

    std::vector<TransformRecord> all_records() const {
        std::vector<TransformRecord> out;
        for (const auto& [stage, records] : by_stage)
            out.insert(out.end(), records.begin(), records.end());
        return out;
    }
};

// Sequential rename -> modular (+ conditional second round) -> planning over
// every verified solution. Per-record failures stop that record's chain and
// never abort the run. Worker count only affects wall time, not output:
// results land in per-solution slots and are concatenated in input order.
inline PipelineResult run_pipeline(const Dataset& dataset, ModelClient& model,
                                   const TransformConfig& config) {
    struct ChainResult {
        std::vector<std::pair<Stage, TransformRecord>> records;
        std::vector<std::pair<Stage, bool>> attempts;  // stage reached -> verified?
        std::vector<AttemptFailure> failures;
    };

    std::vector<const Solution*> work;
    for (const auto& sol : dataset.solutions) {
        if (sol.verified == VerifyState::fail) continue;
        if (!dataset.find_problem(sol.problem_id)) continue;
        work.push_back(&sol);
    }
    std::vector<ChainResult> results(work.size());

    auto process = [&](size_t idx) {
        const Solution& sol = *work[idx];
        const Problem& problem = *dataset.find_problem(sol.problem_id);
        ChainResult& chain = results[idx];

        TransformRecord original;
        original.problem_id = sol.problem_id;
        original.solution_id = sol.solution_id;
        original.stage = Stage::original;
        original.source = sol.source;
        original.verified = true;
        chain.records.emplace_back(Stage::original, original);

        const TransformRecord* parent = &chain.records.back().second;
        for (Stage stage : {Stage::rename, Stage::modular, Stage::planning}) {
            if (static_cast<int>(stage) > static_cast<int>(config.final_stage)) break;
            StageOutcome outcome = run_stage(*parent, stage, problem, model, config);
            chain.attempts.emplace_back(stage, outcome.status == StageStatus::verified);
            for (auto& f : outcome.failure_trail)
                chain.failures.push_back(
                    {static_cast<int>(idx), to_string(stage) + (": " + f.reason)});
            if (outcome.status != StageStatus::verified) break;

            if (stage == Stage::modular) {
                StageOutcome second =
                    detect_and_remodularize(*outcome.record, problem, model, config);
                for (auto& f : second.failure_trail)
                    chain.failures.push_back({static_cast<int>(idx), "remodularize: " + f.reason});
                outcome.record = second.record;
            }
            chain.records.emplace_back(stage, std::move(*outcome.record));
            parent = &chain.records.back().second;
        }
    };

    int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
        for (size_t i = 0; i < work.size(); ++i) process(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1))
                    process(i);
            });
        for (auto& th : pool) th.join();
    }

    PipelineResult result;
    for (Stage stage : all_stages()) result.by_stage[stage];  // stable keys
    for (auto& chain : results) {
        for (auto& [stage, record] : chain.records)
            result.by_stage[stage].push_back(std::move(record));
        for (auto& [stage, ok] : chain.attempts) {
            ++result.counters[stage].attempted;
            if (ok) ++result.counters[stage].verified;
        }
        result.failures.insert(result.failures.end(), chain.failures.begin(), chain.failures.end());
    }
    return result;
}

}  // namespace codeclean
