#pragma once

#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "codeclean/model_client.hpp"
#include "codeclean/prompts.hpp"

namespace codeclean {

inline constexpr const char* kJudgeSystemPrompt =
    "Please act as an impartial judge and evaluate the code refactoring below. You need to "
    "evaluate whether the refactored program uses better and correct variable names, refactors "
    "the implementation into correct smaller helper functions and consistency with the original "
    "program. Your evaluation should be based on correctnes and helpfulness of the refactoring in "
    "better understanding the problem and also if it is still consistent with the original "
    "program, i.e. it follows similar program logic and algorithm. \n"
    "\n"
    "* For evaluating variable names and function decomposition, please give a score from 1 to 3 "
    "where 1 means the refactoring is not helpful at all, 2 means the refactoring is somewhat "
    "helpful and 3 means the refactoring is very helpful. Example format\n"
    "\n"
    "Variable names reasoning: [[reasoning for the variable names score, often assessing whether "
    "the variable names are more descriptive and meaningful and correctly reflect the variable's "
    "purpose]]\n"
    "Variable names: [[1]] or [[2]] or [[3]]\n"
    "\n"
    "Function decomposition reasoning: [[reasoning for the decomposition score, often assessing "
    "whether some function is too long, possibility to perform further abstractions, choice of "
    "abstractions, helper function names]]\n"
    "Function decomposition: [[1]] or [[2]] or [[3]]\n"
    "\n"
    "* For evaluating consistency, please give a score of 0 if the refactored program is not "
    "consistent with the original program and 1 if it is consistent. Example format\n"
    "\n"
    "Consistency reasoning: [[reasoning for the consistency score, often assessing whether the "
    "refactored program follows similar program logic and algorithm as the original program]]\n"
    "Consistency: [[0]] or [[1]]\n";

inline PromptSpec build_judge_prompt(const Problem& problem, const std::string& original,
                                     const std::string& refactored) {
    if (strip(problem.statement).empty())
        throw std::invalid_argument("build_judge_prompt: empty problem statement");
    if (strip(original).empty()) throw std::invalid_argument("build_judge_prompt: empty original");
    if (strip(refactored).empty())
        throw std::invalid_argument("build_judge_prompt: empty refactored solution");
    PromptSpec spec;
    spec.system = kJudgeSystemPrompt;
    spec.user = "QUESTION: \n" + problem.statement + "\n\nORIGINAL SOLUTION:\n" + original +
                "\n\nREFACTORED SOLUTION:\n" + refactored + "\n";
    return spec;
}

struct JudgeVerdict {
    int variable_names = 0;  // 1..3
    int decomposition = 0;   // 1..3
    int consistency = 0;     // 0..1
    std::string variable_names_reasoning;
    std::string decomposition_reasoning;
    std::string consistency_reasoning;
};

namespace detail {

inline bool iequal_at(const std::string& text, size_t pos, std::string_view label) {
    if (pos + label.size() > text.size()) return false;
    for (size_t i = 0; i < label.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) !=
            std::tolower(static_cast<unsigned char>(label[i])))
            return false;
    return true;
}

// Finds "<label>: [[number]]" (case-insensitive label, optional whitespace)
// and returns the floored value. Label occurrences followed by anything but
// a bracketed number (e.g. the "... reasoning:" lines) are skipped.
inline std::optional<double> find_bracketed_score(const std::string& text, std::string_view label) {
    for (size_t pos = 0; pos + label.size() <= text.size(); ++pos) {
        if (!iequal_at(text, pos, label)) continue;
        size_t i = pos + label.size();
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        if (i >= text.size() || text[i] != ':') continue;
        ++i;
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        if (text.compare(i, 2, "[[") != 0) continue;
        i += 2;
        size_t close = text.find("]]", i);
        if (close == std::string::npos) continue;
        std::string inside = strip(text.substr(i, close - i));
        try {
            size_t consumed = 0;
            double value = std::stod(inside, &consumed);
            if (consumed == inside.size()) return value;
        } catch (...) {
        }
    }
    return std::nullopt;
}

inline std::string find_reasoning(const std::string& text, std::string_view label) {
    for (size_t pos = 0; pos + label.size() <= text.size(); ++pos) {
        if (!iequal_at(text, pos, label)) continue;
        size_t i = pos + label.size();
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        if (i >= text.size() || text[i] != ':') continue;
        ++i;
        size_t eol = text.find('\n', i);
        std::string rest = text.substr(i, eol == std::string::npos ? std::string::npos : eol - i);
        std::string inner = strip(rest);
        if (inner.size() >= 4 && inner.substr(0, 2) == "[[" && inner.substr(inner.size() - 2) == "]]")
            inner = strip(inner.substr(2, inner.size() - 4));
        return inner;
    }
    return "";
}

}  // namespace detail

// Total parser: any text yields either a range-valid verdict or nullopt
// (malformed). Non-integer scores floor to the lower integer; a floored
// value outside its declared range is malformed.
inline std::optional<JudgeVerdict> parse_judge_response(const std::string& text) {
    auto variable_names = detail::find_bracketed_score(text, "Variable names");
    auto decomposition = detail::find_bracketed_score(text, "Function decomposition");
    auto consistency = detail::find_bracketed_score(text, "Consistency");
    if (!variable_names || !decomposition || !consistency) return std::nullopt;

    JudgeVerdict verdict;
    verdict.variable_names = static_cast<int>(std::floor(*variable_names));
    verdict.decomposition = static_cast<int>(std::floor(*decomposition));
    verdict.consistency = static_cast<int>(std::floor(*consistency));
    if (verdict.variable_names < 1 || verdict.variable_names > 3) return std::nullopt;
    if (verdict.decomposition < 1 || verdict.decomposition > 3) return std::nullopt;
    if (verdict.consistency < 0 || verdict.consistency > 1) return std::nullopt;

    verdict.variable_names_reasoning = detail::find_reasoning(text, "Variable names reasoning");
    verdict.decomposition_reasoning = detail::find_reasoning(text, "Function decomposition reasoning");
    verdict.consistency_reasoning = detail::find_reasoning(text, "Consistency reasoning");
    return verdict;
}

struct DimensionAggregate {
    std::map<int, size_t> distribution;  // score -> count
    double average_by_counts = 0.0;      // denominator: score-carrying responses
    double average_by_total = 0.0;       // denominator: parsed + malformed
};

struct JudgeAggregate {
    DimensionAggregate variable_names;
    DimensionAggregate decomposition;
    DimensionAggregate consistency;
    size_t parsed_count = 0;
    size_t malformed_count = 0;
    // The two averaging denominators disagree whenever responses were
    // malformed; reports surface both rather than choosing silently.
    bool denominator_discrepancy = false;
};

inline JudgeAggregate aggregate_verdicts(const std::vector<JudgeVerdict>& verdicts,
                                         size_t malformed_count = 0) {
    if (verdicts.empty()) throw std::invalid_argument("aggregate_verdicts: no verdicts");
    JudgeAggregate agg;
    agg.parsed_count = verdicts.size();
    agg.malformed_count = malformed_count;
    agg.denominator_discrepancy = malformed_count > 0;
    for (const auto& v : verdicts) {
        ++agg.variable_names.distribution[v.variable_names];
        ++agg.decomposition.distribution[v.decomposition];
        ++agg.consistency.distribution[v.consistency];
    }
    auto finish = [&](DimensionAggregate& dim) {
        double sum = 0.0;
        size_t count = 0;
        for (const auto& [score, n] : dim.distribution) {
            sum += static_cast<double>(score) * n;
            count += n;
        }
        dim.average_by_counts = count == 0 ? 0.0 : sum / count;
        size_t total = agg.parsed_count + agg.malformed_count;
        dim.average_by_total = total == 0 ? 0.0 : sum / total;
    };
    finish(agg.variable_names);
    finish(agg.decomposition);
    finish(agg.consistency);
    return agg;
}

struct JudgeTranscript {
    std::string pair_id;
    std::string prompt_hash;
    std::string response;
    std::optional<JudgeVerdict> verdict;  // nullopt = malformed
};

struct JudgePair {
    std::string pair_id;
    Problem problem;
    std::string original;
    std::string refactored;
};

struct JudgeRun {
    JudgeAggregate aggregate;
    std::vector<JudgeTranscript> transcripts;
};

struct JudgeConfig {
    std::string model_id = "gpt-4";
    double temperature = 0.0;
};

inline JudgeRun run_judge(const std::vector<JudgePair>& pairs, ModelClient& model,
                          const JudgeConfig& config = {}) {
    JudgeRun run;
    std::vector<JudgeVerdict> verdicts;
    size_t malformed = 0;
    for (const auto& pair : pairs) {
        JudgeTranscript transcript;
        transcript.pair_id = pair.pair_id;
        try {
            PromptSpec prompt = build_judge_prompt(pair.problem, pair.original, pair.refactored);
            prompt.model_id = config.model_id;
            prompt.temperature = config.temperature;
            transcript.prompt_hash = model_call_key(prompt, 0);
            transcript.response = model.complete(prompt, 0);
            transcript.verdict = parse_judge_response(transcript.response);
        } catch (const std::runtime_error& e) {
            transcript.response = std::string("<error: ") + e.what() + ">";
            transcript.verdict = std::nullopt;
        }
        if (transcript.verdict) verdicts.push_back(*transcript.verdict);
        else ++malformed;
        run.transcripts.push_back(std::move(transcript));
    }
    run.aggregate = aggregate_verdicts(verdicts, malformed);
    return run;
}

inline json transcript_to_json(const JudgeTranscript& t) {
    json j;
    j["pair_id"] = t.pair_id;
    j["prompt_hash"] = t.prompt_hash;
    j["response"] = t.response;
    if (t.verdict) {
        json v;
        v["variable_names"] = t.verdict->variable_names;
        v["decomposition"] = t.verdict->decomposition;
        v["consistency"] = t.verdict->consistency;
        j["verdict"] = v;
    } else {
        j["malformed"] = true;
    }
    return j;
}

inline void write_transcripts(const std::vector<JudgeTranscript>& transcripts,
                              const std::filesystem::path& file) {
    std::string body;
    for (const auto& t : transcripts) {
        body += transcript_to_json(t).dump();
        body += '\n';
    }
    atomic_write_file(file, body);
}

}  // namespace codeclean
