#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "codeclean/dataset.hpp"
#include "codeclean/util.hpp"

namespace codeclean {

struct PromptSpec {
    std::optional<std::string> system;
    std::string user;
    double temperature = 0.3;
    int max_attempts = 5;
    std::string model_id;

    void validate() const {
        if (temperature < 0.0 || temperature > 2.0)
            throw std::invalid_argument("PromptSpec: temperature out of [0,2]");
        if (max_attempts < 1) throw std::invalid_argument("PromptSpec: max_attempts must be >= 1");
    }
};

// Stage instruction templates. The braces placeholders are substituted
// verbatim; the fenced-code framing is part of the instruction (the model is
// told to answer inside the same kind of fence).

inline constexpr const char* kRenameTemplate =
    "QUESTION:\n"
    "{problem_statement}\n"
    "\n"
    "ANSWER:\n"
    "```python\n"
    "{solution}\n"
    "```\n"
    "Rename the variables in the program to be descriptive, meaningful, and consistent. "
    "Do not change the original semantics of the program. "
    "Enclose the program within backticks as shown above and remember to use descriptive variable names.\n";

inline constexpr const char* kModularizeTemplate =
    "QUESTION:\n"
    "{problem_statement}\n"
    "\n"
    "ANSWER:\n"
    "```python\n"
    "{renamed_solution}\n"
    "```\n"
    "Refactor the above program. Follow the guidelines\n"
    "* make the program more modular with smaller and meaningful helper functions\n"
    "* good descriptive names for the helper functions\n"
    "* have an entry function called `main()`\n"
    "* `main()` is called inside `if __name__ == '__main__'`\n"
    "\n"
    "Do not change the original semantics of the program significantly and no need to perform "
    "optimizations. Enclose the program within backticks as shown above\n";

inline constexpr const char* kRemodularizeTemplate =
    "QUESTION:\n"
    "{problem_statement}\n"
    "\n"
    "ANSWER:\n"
    "```python\n"
    "{modularized_solution}\n"
    "```\n"
    "Refactor the above program by modularizing it and breaking down long and complex functions "
    "into smaller meaningful helper functions. Particularly refactor and decompose the following "
    "function(s) into smaller helper functions - {function_names_string}\n"
    "Only return the refactored program enclosed in backticks as shown above.\n";

inline constexpr const char* kPlanTemplate =
    "QUESTION:\n"
    "{problem_statement}\n"
    "\n"
    "ANSWER:\n"
    "```python\n"
    "{modularized_solution}\n"
    "```\n"
    "Generate a summary for the following functions and classes in the program within four lines "
    "each. The summaries should be descriptive and helpful for understanding the program (however "
    "yet concise in four lines). \n"
    "The functions and classes are -\n"
    "{list_of_function_names}\n"
    "Follow the provided format for the summaries while being informative and concise. "
    "Enclose the signatures in backticks as shown above.\n";

// Templates ship as defaults baked into the binary and can be overridden by
// files in a prompt directory (rename.txt, modularize.txt, remodularize.txt,
// plan.txt), keeping the placeholder names intact.
struct PromptTemplates {
    std::string rename = kRenameTemplate;
    std::string modularize = kModularizeTemplate;
    std::string remodularize = kRemodularizeTemplate;
    std::string plan = kPlanTemplate;

    static PromptTemplates from_dir(const std::filesystem::path& dir) {
        PromptTemplates t;
        auto load = [&](const char* file, std::string& slot) {
            auto path = dir / file;
            if (std::filesystem::exists(path)) slot = read_file(path);
        };
        load("rename.txt", t.rename);
        load("modularize.txt", t.modularize);
        load("remodularize.txt", t.remodularize);
        load("plan.txt", t.plan);
        return t;
    }
};

inline const PromptTemplates& default_templates() {
    static const PromptTemplates t;
    return t;
}

namespace detail {

inline std::string substitute(std::string text, std::string_view placeholder, std::string_view value) {
    if (!replace_first(text, placeholder, value))
        throw std::logic_error("prompt template missing placeholder: " + std::string(placeholder));
    return text;
}

}  // namespace detail

inline PromptSpec build_rename_prompt(const Problem& problem, const std::string& solution,
                                      const PromptTemplates& templates = default_templates()) {
    if (strip(problem.statement).empty())
        throw std::invalid_argument("build_rename_prompt: empty problem statement");
    if (strip(solution).empty()) throw std::invalid_argument("build_rename_prompt: empty solution");
    PromptSpec spec;
    spec.user = detail::substitute(templates.rename, "{problem_statement}", problem.statement);
    spec.user = detail::substitute(std::move(spec.user), "{solution}", solution);
    return spec;
}

inline PromptSpec build_modularize_prompt(const Problem& problem, const std::string& renamed_solution,
                                          const PromptTemplates& templates = default_templates()) {
    if (strip(problem.statement).empty())
        throw std::invalid_argument("build_modularize_prompt: empty problem statement");
    if (strip(renamed_solution).empty())
        throw std::invalid_argument("build_modularize_prompt: empty solution");
    PromptSpec spec;
    spec.user = detail::substitute(templates.modularize, "{problem_statement}", problem.statement);
    spec.user = detail::substitute(std::move(spec.user), "{renamed_solution}", renamed_solution);
    return spec;
}

inline PromptSpec build_remodularize_prompt(const Problem& problem, const std::string& modularized,
                                            const std::vector<std::string>& long_function_names,
                                            const PromptTemplates& templates = default_templates()) {
    if (strip(problem.statement).empty())
        throw std::invalid_argument("build_remodularize_prompt: empty problem statement");
    if (strip(modularized).empty())
        throw std::invalid_argument("build_remodularize_prompt: empty solution");
    if (long_function_names.empty())
        throw std::invalid_argument("build_remodularize_prompt: no function names");
    PromptSpec spec;
    spec.user = detail::substitute(templates.remodularize, "{problem_statement}", problem.statement);
    spec.user = detail::substitute(std::move(spec.user), "{modularized_solution}", modularized);
    spec.user = detail::substitute(std::move(spec.user), "{function_names_string}",
                                   join(long_function_names, ", "));
    return spec;
}

inline PromptSpec build_plan_prompt(const Problem& problem, const std::string& modularized,
                                    const std::vector<std::string>& function_names,
                                    const PromptTemplates& templates = default_templates()) {
    if (strip(problem.statement).empty())
        throw std::invalid_argument("build_plan_prompt: empty problem statement");
    if (strip(modularized).empty()) throw std::invalid_argument("build_plan_prompt: empty solution");
    if (function_names.empty()) throw std::invalid_argument("build_plan_prompt: no function names");
    PromptSpec spec;
    spec.user = detail::substitute(templates.plan, "{problem_statement}", problem.statement);
    spec.user = detail::substitute(std::move(spec.user), "{modularized_solution}", modularized);
    spec.user =
        detail::substitute(std::move(spec.user), "{list_of_function_names}", join(function_names, "\n"));
    return spec;
}

struct ExtractionError : std::runtime_error {
    enum class Kind { no_fence_found, unterminated_fence };
    Kind kind;
    explicit ExtractionError(Kind k)
        : std::runtime_error(k == Kind::no_fence_found ? "no-fence-found" : "unterminated-fence"),
          kind(k) {}
};

// Contents of the FIRST triple-backtick fence; the language tag on the fence
// line, if any, is dropped along with the fence framing. Fence-less
// completions are hard failures, no heuristic salvage.
inline std::string extract_code_block(const std::string& completion) {
    size_t open = completion.find("```");
    if (open == std::string::npos) throw ExtractionError(ExtractionError::Kind::no_fence_found);
    size_t line_end = completion.find('\n', open + 3);
    if (line_end == std::string::npos) throw ExtractionError(ExtractionError::Kind::unterminated_fence);
    size_t close = completion.find("```", line_end + 1);
    if (close == std::string::npos) throw ExtractionError(ExtractionError::Kind::unterminated_fence);
    std::string body = completion.substr(line_end + 1, close - line_end - 1);
    if (!body.empty() && body.back() == '\n') body.pop_back();
    return body;
}

}  // namespace codeclean
