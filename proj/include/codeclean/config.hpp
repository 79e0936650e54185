#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "codeclean/oracle.hpp"
#include "codeclean/transform.hpp"
#include "codeclean/util.hpp"

namespace codeclean {

// Flat dotted-key configuration. Defaults are the pipeline constants; a
// config file and CLI flags override in that order. MODEL_API_KEY is the
// only secret channel and never appears here.
struct PipelineConfig {
    std::string interpreter_cmd = "python3";
    double wall_time_s = 10.0;
    uint64_t memory_mb = 512;
    uint64_t max_output_mb = 16;

    uint64_t seed = 0;  // root seed; all randomness derives from it
    size_t dedup_cap = 25;
    double dedup_confirm_threshold = 0.6;
    int dedup_shingle_k = 5;

    int transform_max_attempts = 5;
    double transform_temperature = 0.3;
    int long_function_line_threshold = 20;

    int distill_fewshot_sets = 3;
    int distill_per_prompt = 8;
    double distill_temperature = 0.5;

    int jobs = 1;
    std::string cache_dir;     // empty -> <run_dir>/cache
    std::string scratch_dir;   // sandbox temp-dir root; empty -> system default
    std::string model_backend = "mock:echo";
    std::string model_id = "gpt-3.5-turbo";
    std::string judge_model_id = "gpt-4";
    std::string prompt_dir;
    double failure_exit_threshold = 0.5;

    std::map<std::string, std::string> to_keys() const {
        std::map<std::string, std::string> keys;
        auto num = [](double v) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.10g", v);
            return std::string(buf);
        };
        keys["interpreter_cmd"] = interpreter_cmd;
        keys["limits.wall_time_s"] = num(wall_time_s);
        keys["limits.memory_mb"] = std::to_string(memory_mb);
        keys["limits.max_output_mb"] = std::to_string(max_output_mb);
        keys["seed"] = std::to_string(seed);
        keys["dedup.cap"] = std::to_string(dedup_cap);
        keys["dedup.confirm_threshold"] = num(dedup_confirm_threshold);
        keys["dedup.shingle_k"] = std::to_string(dedup_shingle_k);
        keys["transform.max_attempts"] = std::to_string(transform_max_attempts);
        keys["transform.temperature"] = num(transform_temperature);
        keys["transform.long_function_lines"] = std::to_string(long_function_line_threshold);
        keys["distill.fewshot_sets"] = std::to_string(distill_fewshot_sets);
        keys["distill.per_prompt"] = std::to_string(distill_per_prompt);
        keys["distill.temperature"] = num(distill_temperature);
        keys["jobs"] = std::to_string(jobs);
        keys["cache_dir"] = cache_dir;
        keys["scratch_dir"] = scratch_dir;
        keys["model.backend"] = model_backend;
        keys["model.id"] = model_id;
        keys["judge.model_id"] = judge_model_id;
        keys["prompts.dir"] = prompt_dir;
        keys["failure_exit_threshold"] = num(failure_exit_threshold);
        return keys;
    }

    void apply_key(const std::string& key, const std::string& value) {
        if (key == "interpreter_cmd") interpreter_cmd = value;
        else if (key == "limits.wall_time_s") wall_time_s = std::stod(value);
        else if (key == "limits.memory_mb") memory_mb = std::stoull(value);
        else if (key == "limits.max_output_mb") max_output_mb = std::stoull(value);
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "dedup.cap") dedup_cap = std::stoull(value);
        else if (key == "dedup.confirm_threshold") dedup_confirm_threshold = std::stod(value);
        else if (key == "dedup.shingle_k") dedup_shingle_k = std::stoi(value);
        else if (key == "transform.max_attempts") transform_max_attempts = std::stoi(value);
        else if (key == "transform.temperature") transform_temperature = std::stod(value);
        else if (key == "transform.long_function_lines") long_function_line_threshold = std::stoi(value);
        else if (key == "distill.fewshot_sets") distill_fewshot_sets = std::stoi(value);
        else if (key == "distill.per_prompt") distill_per_prompt = std::stoi(value);
        else if (key == "distill.temperature") distill_temperature = std::stod(value);
        else if (key == "jobs") jobs = std::stoi(value);
        else if (key == "cache_dir") cache_dir = value;
        else if (key == "scratch_dir") scratch_dir = value;
        else if (key == "model.backend") model_backend = value;
        else if (key == "model.id") model_id = value;
        else if (key == "judge.model_id") judge_model_id = value;
        else if (key == "prompts.dir") prompt_dir = value;
        else if (key == "failure_exit_threshold") failure_exit_threshold = std::stod(value);
        else throw std::runtime_error("unknown config key: " + key);
    }

    // Worker count, cache location, and the exit-code threshold cannot
    // change outputs, so they stay out of the snapshot that gates resumes.
    static const std::set<std::string>& execution_only_keys() {
        static const std::set<std::string> keys = {"jobs", "cache_dir", "scratch_dir",
                                                   "failure_exit_threshold"};
        return keys;
    }

    std::string canonical_text() const {
        std::string out;
        for (const auto& [k, v] : to_keys()) {
            if (execution_only_keys().count(k)) continue;
            out += k;
            out += " = ";
            out += v;
            out += '\n';
        }
        return out;
    }

    std::string hash() const { return sha256_hex(canonical_text()); }

    OracleConfig oracle_config() const {
        OracleConfig oc;
        oc.limits.wall_time_s = wall_time_s;
        oc.limits.memory_bytes = memory_mb * 1024 * 1024;
        oc.limits.max_output_bytes = max_output_mb * 1024 * 1024;
        oc.interpreter_cmd = interpreter_cmd;
        if (!scratch_dir.empty()) oc.scratch_root = scratch_dir;
        return oc;
    }

    TransformConfig transform_config() const {
        TransformConfig tc;
        tc.max_attempts = transform_max_attempts;
        tc.temperature = transform_temperature;
        tc.model_id = model_id;
        tc.long_function_line_threshold = long_function_line_threshold;
        tc.oracle = oracle_config();
        tc.jobs = jobs;
        if (!prompt_dir.empty()) tc.templates = PromptTemplates::from_dir(prompt_dir);
        return tc;
    }

    DistillConfig distill_config() const {
        DistillConfig dc;
        dc.fewshot_sets = distill_fewshot_sets;
        dc.per_prompt = distill_per_prompt;
        dc.temperature = distill_temperature;
        dc.model_id = model_id;
        dc.max_attempts = transform_max_attempts;
        dc.oracle = oracle_config();
        return dc;
    }
};

inline void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
    std::string text = read_file(path);
    size_t line_no = 0;
    for (const auto& raw : split_lines(text)) {
        ++line_no;
        std::string line = strip(raw);
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
        config.apply_key(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
}

}  // namespace codeclean
