#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "codeclean/util.hpp"

namespace codeclean {

using json = nlohmann::json;

enum class Difficulty { introductory, interview, competition, unknown };

inline const char* to_string(Difficulty d) {
    switch (d) {
        case Difficulty::introductory: return "introductory";
        case Difficulty::interview: return "interview";
        case Difficulty::competition: return "competition";
        default: return "unknown";
    }
}

inline Difficulty difficulty_from_string(const std::string& s) {
    if (s == "introductory") return Difficulty::introductory;
    if (s == "interview") return Difficulty::interview;
    if (s == "competition") return Difficulty::competition;
    return Difficulty::unknown;
}

struct TestSuite {
    std::vector<std::string> inputs;
    std::vector<std::string> expected_outputs;

    size_t size() const { return inputs.size(); }
    bool empty() const { return inputs.empty(); }
};

struct Problem {
    std::string id;
    std::string platform;
    std::string statement;
    Difficulty difficulty = Difficulty::unknown;
    TestSuite tests;
    std::vector<std::string> reference_solutions;
    bool multi_answer = false;
};

enum class VerifyState { pass, fail, unchecked };

struct Solution {
    std::string problem_id;
    std::string solution_id;
    std::string source;
    VerifyState verified = VerifyState::unchecked;
};

enum class Stage { original, rename, modular, planning, distill };

inline const char* to_string(Stage s) {
    switch (s) {
        case Stage::original: return "original";
        case Stage::rename: return "rename";
        case Stage::modular: return "modular";
        case Stage::planning: return "planning";
        case Stage::distill: return "distill";
    }
    return "original";
}

inline std::optional<Stage> stage_from_string(const std::string& s) {
    if (s == "original") return Stage::original;
    if (s == "rename") return Stage::rename;
    if (s == "modular") return Stage::modular;
    if (s == "planning") return Stage::planning;
    if (s == "distill") return Stage::distill;
    return std::nullopt;
}

inline const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages = {Stage::original, Stage::rename, Stage::modular,
                                              Stage::planning, Stage::distill};
    return stages;
}

struct TransformRecord {
    std::string problem_id;
    std::string solution_id;
    Stage stage = Stage::original;
    std::string source;
    std::string plan;  // non-empty only for stage=planning
    std::optional<std::string> parent_solution_id;
    int attempts_used = 0;
    bool verified = false;
    std::string model_id;
};

struct DatasetStats {
    size_t total_records = 0;
    size_t transformed_ok = 0;
    double success_rate = 0.0;
    double inserted_functions_median = 0.0;
    double inserted_functions_mean = 0.0;
};

struct IngestError {
    size_t line = 0;  // 1-based line within the source file
    std::string file;
    std::string field;
    std::string message;
};

struct Dataset {
    std::vector<Problem> problems;
    std::vector<Solution> solutions;
    std::vector<TransformRecord> records;
    std::vector<IngestError> errors;

    const Problem* find_problem(const std::string& id) const {
        for (const auto& p : problems)
            if (p.id == id) return &p;
        return nullptr;
    }
};

enum class SchemaKind { apps, code_contests, native };

inline std::optional<SchemaKind> schema_from_string(const std::string& s) {
    if (s == "apps") return SchemaKind::apps;
    if (s == "code_contests") return SchemaKind::code_contests;
    if (s == "native") return SchemaKind::native;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON codecs (native schema)
// ---------------------------------------------------------------------------

inline json problem_to_json(const Problem& p) {
    json tests;
    tests["inputs"] = p.tests.inputs;
    tests["outputs"] = p.tests.expected_outputs;
    json j;
    j["id"] = p.id;
    j["platform"] = p.platform;
    j["statement"] = p.statement;
    j["difficulty"] = to_string(p.difficulty);
    j["tests"] = tests;
    j["reference_solutions"] = p.reference_solutions;
    j["multi_answer"] = p.multi_answer;
    return j;
}

inline json solution_to_json(const Solution& s) {
    json j;
    j["problem_id"] = s.problem_id;
    j["solution_id"] = s.solution_id;
    j["source"] = s.source;
    return j;
}

inline json record_to_json(const TransformRecord& r) {
    json j;
    j["problem_id"] = r.problem_id;
    j["solution_id"] = r.solution_id;
    j["stage"] = to_string(r.stage);
    j["source"] = r.source;
    if (!r.plan.empty()) j["plan"] = r.plan;
    if (r.parent_solution_id) j["parent_solution_id"] = *r.parent_solution_id;
    j["attempts_used"] = r.attempts_used;
    j["verified"] = r.verified;
    j["model_id"] = r.model_id;
    return j;
}

namespace detail {

inline const json& require_field(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end()) throw std::runtime_error(std::string("missing field: ") + field);
    return *it;
}

inline std::vector<std::string> string_list(const json& j) {
    std::vector<std::string> out;
    for (const auto& v : j) out.push_back(v.get<std::string>());
    return out;
}

}  // namespace detail

inline Problem problem_from_json(const json& j) {
    Problem p;
    p.id = detail::require_field(j, "id").get<std::string>();
    p.platform = detail::require_field(j, "platform").get<std::string>();
    p.statement = detail::require_field(j, "statement").get<std::string>();
    p.difficulty = difficulty_from_string(j.value("difficulty", "unknown"));
    const json& tests = detail::require_field(j, "tests");
    p.tests.inputs = detail::string_list(detail::require_field(tests, "inputs"));
    p.tests.expected_outputs = detail::string_list(detail::require_field(tests, "outputs"));
    if (p.tests.inputs.size() != p.tests.expected_outputs.size())
        throw std::runtime_error("field tests: inputs/outputs length mismatch");
    if (j.contains("reference_solutions")) p.reference_solutions = detail::string_list(j["reference_solutions"]);
    p.multi_answer = j.value("multi_answer", false);
    return p;
}

inline Solution solution_from_json(const json& j) {
    Solution s;
    s.problem_id = detail::require_field(j, "problem_id").get<std::string>();
    s.solution_id = detail::require_field(j, "solution_id").get<std::string>();
    s.source = detail::require_field(j, "source").get<std::string>();
    return s;
}

inline TransformRecord record_from_json(const json& j) {
    TransformRecord r;
    r.problem_id = detail::require_field(j, "problem_id").get<std::string>();
    r.solution_id = detail::require_field(j, "solution_id").get<std::string>();
    auto stage = stage_from_string(detail::require_field(j, "stage").get<std::string>());
    if (!stage) throw std::runtime_error("field stage: unknown value");
    r.stage = *stage;
    r.source = detail::require_field(j, "source").get<std::string>();
    r.plan = j.value("plan", "");
    if (j.contains("parent_solution_id")) r.parent_solution_id = j["parent_solution_id"].get<std::string>();
    r.attempts_used = j.value("attempts_used", 0);
    r.verified = j.value("verified", false);
    r.model_id = j.value("model_id", "");
    return r;
}

// ---------------------------------------------------------------------------
// Benchmark-schema adapters. Both produce the native in-memory shape.
// ---------------------------------------------------------------------------

namespace detail {

// APPS stores "solutions" and "input_output" either inline or as embedded JSON strings.
inline json unwrap_embedded(const json& j) {
    if (j.is_string()) return json::parse(j.get<std::string>());
    return j;
}

inline std::string platform_from_url(const std::string& url) {
    static const std::vector<std::pair<std::string, std::string>> known = {
        {"codeforces", "codeforces"}, {"codechef", "codechef"},   {"atcoder", "atcoder"},
        {"leetcode", "leetcode"},     {"hackerrank", "hackerrank"}, {"hackerearth", "hackerearth"},
        {"kattis", "kattis"},         {"aizu", "aizu"},
    };
    for (const auto& [needle, name] : known)
        if (url.find(needle) != std::string::npos) return name;
    return "unknown";
}

inline Problem apps_problem(const json& j, size_t line_no) {
    Problem p;
    if (j.contains("id"))
        p.id = j["id"].is_string() ? j["id"].get<std::string>() : std::to_string(j["id"].get<int64_t>());
    else if (j.contains("problem_id"))
        p.id = j["problem_id"].is_string() ? j["problem_id"].get<std::string>()
                                           : std::to_string(j["problem_id"].get<int64_t>());
    else
        p.id = "apps-" + std::to_string(line_no);
    p.statement = require_field(j, "question").get<std::string>();
    p.platform = j.contains("platform") ? j["platform"].get<std::string>()
                                        : platform_from_url(j.value("url", ""));
    p.difficulty = difficulty_from_string(j.value("difficulty", "unknown"));
    if (j.contains("input_output")) {
        json io = unwrap_embedded(j["input_output"]);
        p.tests.inputs = string_list(require_field(io, "inputs"));
        p.tests.expected_outputs = string_list(require_field(io, "outputs"));
        if (p.tests.inputs.size() != p.tests.expected_outputs.size())
            throw std::runtime_error("field input_output: inputs/outputs length mismatch");
    }
    if (j.contains("solutions")) p.reference_solutions = string_list(unwrap_embedded(j["solutions"]));
    p.multi_answer = j.value("multi_answer", false);
    return p;
}

inline const char* code_contests_platform(int source) {
    switch (source) {
        case 1: return "codechef";
        case 2: return "codeforces";
        case 3: return "hackerearth";
        case 4: return "codejam";
        case 5: return "atcoder";
        case 6: return "aizu";
        default: return "unknown";
    }
}

inline void append_cc_tests(const json& block, TestSuite& tests) {
    if (!block.is_object()) return;
    auto inputs = string_list(block.value("input", json::array()));
    auto outputs = string_list(block.value("output", json::array()));
    if (inputs.size() != outputs.size())
        throw std::runtime_error("field tests: inputs/outputs length mismatch");
    tests.inputs.insert(tests.inputs.end(), inputs.begin(), inputs.end());
    tests.expected_outputs.insert(tests.expected_outputs.end(), outputs.begin(), outputs.end());
}

inline Problem code_contests_problem(const json& j) {
    Problem p;
    p.id = require_field(j, "name").get<std::string>();
    p.statement = require_field(j, "description").get<std::string>();
    if (j.contains("source") && j["source"].is_number_integer())
        p.platform = code_contests_platform(j["source"].get<int>());
    else
        p.platform = j.value("source", "unknown");
    for (const char* key : {"public_tests", "private_tests", "generated_tests"})
        if (j.contains(key)) append_cc_tests(j[key], p.tests);
    if (j.contains("solutions")) {
        const json& sols = j["solutions"];
        if (sols.is_object() && sols.contains("solution"))
            p.reference_solutions = string_list(sols["solution"]);
        else if (sols.is_array())
            for (const auto& s : sols)
                p.reference_solutions.push_back(s.is_string() ? s.get<std::string>()
                                                              : s.value("solution", ""));
    }
    p.multi_answer = j.value("multi_answer", false);
    return p;
}

struct LineSink {
    Dataset& out;
    std::string file;
    SchemaKind schema;
    size_t line_no = 0;

    void consume(const std::string& line) {
        ++line_no;
        if (strip(line).empty()) return;
        try {
            json j = json::parse(line);
            switch (schema) {
                case SchemaKind::apps: out.problems.push_back(apps_problem(j, line_no)); break;
                case SchemaKind::code_contests: out.problems.push_back(code_contests_problem(j)); break;
                case SchemaKind::native: out.problems.push_back(problem_from_json(j)); break;
            }
        } catch (const std::exception& e) {
            IngestError err;
            err.line = line_no;
            err.file = file;
            err.message = e.what();
            std::string what = e.what();
            if (auto pos = what.find("missing field: "); pos != std::string::npos)
                err.field = what.substr(pos + 15);
            else if (auto fpos = what.find("field "); fpos != std::string::npos) {
                auto rest = what.substr(fpos + 6);
                err.field = rest.substr(0, rest.find(':'));
            }
            out.errors.push_back(std::move(err));
        }
    }
};

template <typename PerLine>
inline void for_each_jsonl_line(const std::filesystem::path& path, PerLine&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::string line;
    while (std::getline(in, line)) fn(line);
}

}  // namespace detail

// Loads problems (and, for a native directory, solutions plus transformed
// records) into memory. Unparseable lines are quarantined into
// Dataset::errors rather than aborting the load.
inline Dataset load_dataset(const std::filesystem::path& path, SchemaKind schema) {
    namespace fs = std::filesystem;
    Dataset ds;
    if (!fs::exists(path)) throw std::runtime_error("dataset path does not exist: " + path.string());

    auto load_problem_file = [&](const fs::path& file) {
        detail::LineSink sink{ds, file.filename().string(), schema};
        detail::for_each_jsonl_line(file, [&](const std::string& line) { sink.consume(line); });
    };

    if (fs::is_directory(path)) {
        fs::path problems = path / "problems.jsonl";
        if (fs::exists(problems)) load_problem_file(problems);
        if (schema == SchemaKind::native) {
            fs::path solutions = path / "solutions.jsonl";
            if (fs::exists(solutions)) {
                size_t line_no = 0;
                detail::for_each_jsonl_line(solutions, [&](const std::string& line) {
                    ++line_no;
                    if (strip(line).empty()) return;
                    try {
                        ds.solutions.push_back(solution_from_json(json::parse(line)));
                    } catch (const std::exception& e) {
                        ds.errors.push_back({line_no, "solutions.jsonl", "", e.what()});
                    }
                });
            }
            for (Stage stage : all_stages()) {
                fs::path f = path / (std::string("transformed.") + to_string(stage) + ".jsonl");
                if (!fs::exists(f)) continue;
                size_t line_no = 0;
                detail::for_each_jsonl_line(f, [&](const std::string& line) {
                    ++line_no;
                    if (strip(line).empty()) return;
                    try {
                        ds.records.push_back(record_from_json(json::parse(line)));
                    } catch (const std::exception& e) {
                        ds.errors.push_back({line_no, f.filename().string(), "", e.what()});
                    }
                });
            }
        }
    } else {
        load_problem_file(path);
    }
    return ds;
}

// Retains exactly the problems whose platform is allowed; solutions and
// records of dropped problems are dropped with them.
inline Dataset filter_platforms(const Dataset& ds, const std::set<std::string>& allowed) {
    Dataset out;
    out.errors = ds.errors;
    std::set<std::string> kept_ids;
    for (const auto& p : ds.problems)
        if (allowed.count(p.platform)) {
            out.problems.push_back(p);
            kept_ids.insert(p.id);
        }
    for (const auto& s : ds.solutions)
        if (kept_ids.count(s.problem_id)) out.solutions.push_back(s);
    for (const auto& r : ds.records)
        if (kept_ids.count(r.problem_id)) out.records.push_back(r);
    return out;
}

// Verifier contract: returns pass/fail for one solution against its problem.
// The execution-oracle binding lives with the caller; per-solution failures
// are data (the solution is dropped), not errors.
using SolutionVerifier = std::function<bool(const Problem&, const Solution&)>;

inline Dataset filter_verified_solutions(const Dataset& ds, const SolutionVerifier& verify) {
    Dataset out;
    out.problems = ds.problems;
    out.records = ds.records;
    out.errors = ds.errors;
    for (const auto& s : ds.solutions) {
        const Problem* p = out.find_problem(s.problem_id);
        if (!p) continue;
        Solution checked = s;
        bool ok = verify(*p, s);
        checked.verified = ok ? VerifyState::pass : VerifyState::fail;
        if (ok) out.solutions.push_back(std::move(checked));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parallel-dataset persistence
// ---------------------------------------------------------------------------

struct StageFile {
    std::string path;  // empty when the stage has no records
    size_t count = 0;
    std::string sha256;
};

struct Manifest {
    std::map<std::string, StageFile> stages;

    json to_json() const {
        json j;
        for (const auto& [stage, f] : stages) {
            json entry;
            entry["count"] = f.count;
            if (!f.path.empty()) {
                entry["path"] = f.path;
                entry["sha256"] = f.sha256;
            }
            j[stage] = entry;
        }
        return j;
    }

    static Manifest from_json(const json& j) {
        Manifest m;
        for (auto it = j.begin(); it != j.end(); ++it) {
            StageFile f;
            f.count = it.value().value("count", 0u);
            f.path = it.value().value("path", "");
            f.sha256 = it.value().value("sha256", "");
            m.stages[it.key()] = f;
        }
        return m;
    }
};

// One JSONL file per stage with records in input order; every stage appears
// in the manifest (count 0 for empty stages). manifest.json is written last.
inline Manifest write_parallel(const std::vector<TransformRecord>& records,
                               const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    Manifest manifest;
    for (Stage stage : all_stages()) {
        std::string body;
        size_t count = 0;
        for (const auto& r : records) {
            if (r.stage != stage) continue;
            body += record_to_json(r).dump();
            body += '\n';
            ++count;
        }
        StageFile f;
        f.count = count;
        if (count > 0) {
            f.path = std::string("transformed.") + to_string(stage) + ".jsonl";
            f.sha256 = sha256_hex(body);
            atomic_write_file(out_dir / f.path, body);
        }
        manifest.stages[to_string(stage)] = f;
    }
    atomic_write_file(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    return manifest;
}

inline void write_problems(const std::vector<Problem>& problems, const std::filesystem::path& file) {
    std::string body;
    for (const auto& p : problems) {
        body += problem_to_json(p).dump();
        body += '\n';
    }
    atomic_write_file(file, body);
}

inline void write_solutions(const std::vector<Solution>& solutions, const std::filesystem::path& file) {
    std::string body;
    for (const auto& s : solutions) {
        body += solution_to_json(s).dump();
        body += '\n';
    }
    atomic_write_file(file, body);
}

inline void write_ingest_errors(const std::vector<IngestError>& errors, const std::filesystem::path& file) {
    std::string body;
    for (const auto& e : errors) {
        json j;
        j["line"] = e.line;
        j["file"] = e.file;
        if (!e.field.empty()) j["field"] = e.field;
        j["message"] = e.message;
        body += j.dump();
        body += '\n';
    }
    atomic_write_file(file, body);
}

}  // namespace codeclean
