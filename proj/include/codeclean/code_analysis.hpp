#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "codeclean/dataset.hpp"
#include "codeclean/pylex.hpp"

namespace codeclean {

struct FunctionInfo {
    std::string name;
    std::string signature;  // parameter list, whitespace-collapsed
    int start_line = 0;     // 1-based physical line of the def header
    int line_count = 0;     // header through last body code line, inclusive
    int nesting_depth = 0;  // enclosing def/class scopes
};

struct ParseResult {
    std::vector<FunctionInfo> functions;
    bool parse_warning = false;
};

namespace detail {

// Matches `def name` / `async def name` at the start of a stripped line and
// returns the name, or empty when the line is not a function header.
inline std::string def_name(const std::string& stripped) {
    std::string_view s = stripped;
    if (s.substr(0, 6) == "async ") {
        s.remove_prefix(6);
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    }
    if (s.substr(0, 3) != "def") return "";
    s.remove_prefix(3);
    if (s.empty() || (s.front() != ' ' && s.front() != '\t')) return "";
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    size_t end = 0;
    while (end < s.size() && pylex::is_ident_char(s[end])) ++end;
    return std::string(s.substr(0, end));
}

inline bool is_class_header(const std::string& stripped) {
    if (stripped.substr(0, 5) != "class") return false;
    return stripped.size() > 5 && (stripped[5] == ' ' || stripped[5] == '\t');
}

inline std::string collapse_ws(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

// Extracts the parameter list from a logical header that may span several
// physical lines, honoring strings in default values.
inline std::string signature_of(const std::string& header) {
    size_t open = header.find('(');
    if (open == std::string::npos) return "";
    int depth = 0;
    size_t i = open;
    while (i < header.size()) {
        char c = header[i];
        if (c == '\'' || c == '"') {
            i = pylex::scan_string(header, i, nullptr);
            continue;
        }
        if (c == '(' || c == '[' || c == '{') ++depth;
        else if (c == ')' || c == ']' || c == '}') {
            --depth;
            if (depth == 0) return collapse_ws(header.substr(open + 1, i - open - 1));
        }
        ++i;
    }
    return collapse_ws(header.substr(open + 1));
}

}  // namespace detail

// Reports every function definition in the source (any nesting depth) with
// its physical-line span. Degrades to an empty list plus a warning flag
// rather than failing on broken sources.
inline ParseResult parse_functions(const std::string& source) {
    ParseResult result;
    LineScan scan = scan_lines(source);
    result.parse_warning = scan.warning;
    const auto& lines = scan.lines;

    struct Scope {
        int indent;
        bool is_def_or_class;
    };
    std::vector<Scope> scopes;

    for (size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (!line.logical_start || line.blank || line.comment_only) continue;

        while (!scopes.empty() && line.indent <= scopes.back().indent) scopes.pop_back();

        std::string stripped = strip(line.text);
        std::string name = detail::def_name(stripped);
        bool is_class = name.empty() && detail::is_class_header(stripped);
        if (name.empty() && !is_class) continue;

        if (!name.empty()) {
            FunctionInfo info;
            info.name = name;
            info.start_line = static_cast<int>(i) + 1;
            info.nesting_depth = static_cast<int>(
                std::count_if(scopes.begin(), scopes.end(), [](const Scope& s) { return s.is_def_or_class; }));

            // The header may continue over bracketed lines.
            std::string header = line.text;
            size_t j = i + 1;
            while (j < lines.size() && !lines[j].logical_start) {
                header += '\n';
                header += lines[j].text;
                ++j;
            }
            info.signature = detail::signature_of(header);

            // Body: physical lines until the next logical line at indent <= def's.
            size_t last_code = j - 1;
            size_t k = j;
            bool in_body_logical = false;
            while (k < lines.size()) {
                const auto& bl = lines[k];
                if (bl.logical_start) {
                    if (!bl.blank && !bl.comment_only) {
                        if (bl.indent <= line.indent) break;
                        in_body_logical = true;
                        last_code = k;
                    } else {
                        in_body_logical = false;
                    }
                } else if (in_body_logical && !bl.blank) {
                    last_code = k;
                }
                ++k;
            }
            info.line_count = static_cast<int>(last_code - i) + 1;
            result.functions.push_back(std::move(info));
        }
        scopes.push_back({line.indent, true});
    }
    return result;
}

// New definitions added by a transformation, floored at zero.
inline int count_inserted_functions(const std::string& original_source,
                                    const std::string& transformed_source) {
    int before = static_cast<int>(parse_functions(original_source).functions.size());
    int after = static_cast<int>(parse_functions(transformed_source).functions.size());
    return std::max(0, after - before);
}

struct ClusterEntry {
    size_t occurrences = 0;
    size_t problems = 0;              // distinct problems containing the name
    double problem_frequency = 0.0;   // problems / total problems
    std::vector<std::string> example_signatures;  // up to a handful, first-seen order
};

struct ClusterReport {
    std::map<std::string, ClusterEntry> clusters;
    size_t total_problems = 0;
    size_t total_function_occurrences = 0;  // excluding entry points
};

namespace detail {

inline std::string normalize_helper_name(const std::string& name) {
    std::string out;
    for (char c : name)
        if (c != '_') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace detail

// Groups helper functions across a modular dataset by normalized name.
// `main` (and the __main__ guard) is the mandated entry point and is excluded.
inline ClusterReport cluster_helpers(const std::vector<TransformRecord>& records) {
    ClusterReport report;
    std::map<std::string, std::set<std::string>> problems_with;
    std::set<std::string> all_problems;
    for (const auto& r : records) {
        all_problems.insert(r.problem_id);
        for (const auto& fn : parse_functions(r.source).functions) {
            if (fn.name == "main" || fn.name == "__main__") continue;
            std::string key = detail::normalize_helper_name(fn.name);
            auto& entry = report.clusters[key];
            ++entry.occurrences;
            ++report.total_function_occurrences;
            if (entry.example_signatures.size() < 5 &&
                std::find(entry.example_signatures.begin(), entry.example_signatures.end(),
                          fn.signature) == entry.example_signatures.end())
                entry.example_signatures.push_back(fn.signature);
            problems_with[key].insert(r.problem_id);
        }
    }
    report.total_problems = all_problems.size();
    for (auto& [key, entry] : report.clusters) {
        entry.problems = problems_with[key].size();
        entry.problem_frequency =
            report.total_problems == 0 ? 0.0
                                       : static_cast<double>(entry.problems) / report.total_problems;
    }
    return report;
}

inline double median_of(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return values[n / 2];
    return (static_cast<double>(values[n / 2 - 1]) + values[n / 2]) / 2.0;
}

struct InsertedFunctionStats {
    std::vector<int> counts;  // one per linked original/modular pair
    double median = 0.0;
    double mean = 0.0;
};

// Median/mean of inserted-function counts over linked original->transformed
// pairs, plus per-stage success accounting.
inline InsertedFunctionStats inserted_function_stats(
    const std::vector<TransformRecord>& originals, const std::vector<TransformRecord>& transformed) {
    std::map<std::pair<std::string, std::string>, const TransformRecord*> by_key;
    for (const auto& r : originals) by_key[{r.problem_id, r.solution_id}] = &r;
    InsertedFunctionStats stats;
    for (const auto& t : transformed) {
        std::string parent = t.parent_solution_id.value_or(t.solution_id);
        auto it = by_key.find({t.problem_id, parent});
        if (it == by_key.end()) continue;
        stats.counts.push_back(count_inserted_functions(it->second->source, t.source));
    }
    if (stats.counts.empty()) throw std::runtime_error("inserted_function_stats: no linked pairs");
    stats.median = median_of(stats.counts);
    stats.mean = std::accumulate(stats.counts.begin(), stats.counts.end(), 0.0) / stats.counts.size();
    return stats;
}

// DatasetStats over one transformed stage relative to its source records.
inline DatasetStats compute_stats(const std::vector<TransformRecord>& originals,
                                  const std::vector<TransformRecord>& transformed) {
    DatasetStats stats;
    stats.total_records = originals.size();
    stats.transformed_ok = 0;
    for (const auto& t : transformed)
        if (t.verified) ++stats.transformed_ok;
    stats.success_rate =
        stats.total_records == 0 ? 0.0 : static_cast<double>(stats.transformed_ok) / stats.total_records;
    auto fn_stats = inserted_function_stats(originals, transformed);
    stats.inserted_functions_median = fn_stats.median;
    stats.inserted_functions_mean = fn_stats.mean;
    return stats;
}

}  // namespace codeclean
