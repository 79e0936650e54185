#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <set>
#include <string>

#include "codeclean/config.hpp"
#include "codeclean/dedup.hpp"
#include "codeclean/judge.hpp"
#include "codeclean/transform.hpp"

namespace codeclean {

struct RunPaths {
    std::filesystem::path run_dir;

    std::filesystem::path problems() const { return run_dir / "problems.jsonl"; }
    std::filesystem::path solutions() const { return run_dir / "solutions.jsonl"; }
    std::filesystem::path errors() const { return run_dir / "errors.jsonl"; }
    std::filesystem::path stage_file(Stage s) const {
        return run_dir / (std::string("transformed.") + to_string(s) + ".jsonl");
    }
    std::filesystem::path manifest() const { return run_dir / "manifest.json"; }
    std::filesystem::path config_snapshot() const { return run_dir / "config.snapshot"; }
    std::filesystem::path meta() const { return run_dir / "run_meta.json"; }
    std::filesystem::path cache(const PipelineConfig& config) const {
        return config.cache_dir.empty() ? run_dir / "cache"
                                        : std::filesystem::path(config.cache_dir);
    }
    std::filesystem::path reports() const { return run_dir / "reports"; }
    std::filesystem::path dedup_report() const { return run_dir / "dedup_report.csv"; }
    std::filesystem::path judge_transcripts() const { return run_dir / "judge_transcripts.jsonl"; }
    std::filesystem::path samples() const { return run_dir / "samples.jsonl"; }
};

struct ConfigMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Writes the config snapshot on first use; refuses to run when the run dir
// was created under a different configuration.
inline void check_or_write_config_snapshot(const RunPaths& paths, const PipelineConfig& config) {
    std::filesystem::create_directories(paths.run_dir);
    std::string canonical = config.canonical_text();
    if (std::filesystem::exists(paths.config_snapshot())) {
        std::string existing = read_file(paths.config_snapshot());
        if (sha256_hex(existing) != sha256_hex(canonical))
            throw ConfigMismatch(
                "run dir was created with a different config; refusing to resume (config hash " +
                sha256_hex(existing).substr(0, 12) + " != " + sha256_hex(canonical).substr(0, 12) + ")");
        return;
    }
    atomic_write_file(paths.config_snapshot(), canonical);
}

// Model backend specs: "mock:echo", "mock:<script.jsonl>", "fixture:<dir>",
// and (CLI only) "live". Every backend is wrapped in the call cache.
inline std::shared_ptr<CachingClient> make_cached_client(const PipelineConfig& config,
                                                         const RunPaths& paths,
                                                         std::unique_ptr<ModelClient> live_backend = nullptr) {
    const std::string& spec = config.model_backend;
    if (spec == "live") {
        if (!live_backend)
            throw std::runtime_error("live backend requested but not available in this context");
        auto cache = std::make_shared<CallCache>(paths.cache(config));
        return std::make_shared<CachingClient>(cache, std::move(live_backend));
    }
    if (spec.rfind("fixture:", 0) == 0) {
        auto cache = std::make_shared<CallCache>(spec.substr(8));
        return std::make_shared<CachingClient>(cache, nullptr);
    }
    auto cache = std::make_shared<CallCache>(paths.cache(config));
    if (spec == "mock:echo") return std::make_shared<CachingClient>(cache, MockClient::echo());
    if (spec.rfind("mock:", 0) == 0)
        return std::make_shared<CachingClient>(cache,
                                               std::make_unique<ScriptFileClient>(spec.substr(5)));
    throw std::runtime_error("unknown model backend: " + spec);
}

struct IngestSummary {
    size_t problems = 0;
    size_t solutions = 0;
    size_t quarantined = 0;
    size_t dropped_unverified = 0;
};

// Loads a source dataset, optionally filters platforms, materializes the
// solution table (from solutions.jsonl when present, else from each
// problem's reference solutions), optionally verifies solutions against the
// oracle, and persists the native files into the run dir.
inline IngestSummary ingest_run(const RunPaths& paths, const std::filesystem::path& input,
                                SchemaKind schema, const PipelineConfig& config,
                                const std::set<std::string>& allowed_platforms = {},
                                bool verify_solutions = false) {
    check_or_write_config_snapshot(paths, config);
    Dataset ds = load_dataset(input, schema);
    if (!allowed_platforms.empty()) ds = filter_platforms(ds, allowed_platforms);
    if (ds.solutions.empty()) {
        for (const auto& p : ds.problems)
            for (size_t i = 0; i < p.reference_solutions.size(); ++i) {
                Solution s;
                s.problem_id = p.id;
                s.solution_id = p.id + "-s" + std::to_string(i);
                s.source = p.reference_solutions[i];
                ds.solutions.push_back(std::move(s));
            }
    }
    IngestSummary summary;
    summary.quarantined = ds.errors.size();
    if (verify_solutions) {
        size_t before = ds.solutions.size();
        ds = filter_verified_solutions(ds, make_oracle_verifier(config.oracle_config()));
        summary.dropped_unverified = before - ds.solutions.size();
    }
    write_problems(ds.problems, paths.problems());
    write_solutions(ds.solutions, paths.solutions());
    if (!ds.errors.empty()) write_ingest_errors(ds.errors, paths.errors());
    summary.problems = ds.problems.size();
    summary.solutions = ds.solutions.size();
    return summary;
}

struct DedupSummary {
    size_t kept = 0;
    size_t dropped = 0;
    std::string report_csv;  // per-problem kept/dropped counts
};

inline DedupSummary dedup_run(const RunPaths& paths, const PipelineConfig& config) {
    check_or_write_config_snapshot(paths, config);
    Dataset ds = load_dataset(paths.run_dir, SchemaKind::native);
    std::vector<Solution> kept_all;
    DedupSummary summary;
    summary.report_csv = "problem_id,kept,dropped\n";
    for (const auto& p : ds.problems) {
        std::vector<Solution> group;
        for (const auto& s : ds.solutions)
            if (s.problem_id == p.id) group.push_back(s);
        if (group.empty()) continue;
        auto kept = dedup_solutions(group, config.dedup_cap, config.seed,
                                    config.dedup_confirm_threshold);
        summary.kept += kept.size();
        summary.dropped += group.size() - kept.size();
        summary.report_csv += p.id + "," + std::to_string(kept.size()) + "," +
                              std::to_string(group.size() - kept.size()) + "\n";
        kept_all.insert(kept_all.end(), kept.begin(), kept.end());
    }
    write_solutions(kept_all, paths.solutions());
    atomic_write_file(paths.dedup_report(), summary.report_csv);
    return summary;
}

struct TransformRunSummary {
    Manifest manifest;
    std::map<Stage, StageCounters> counters;
    size_t chains_total = 0;
    size_t chains_resumed = 0;
    size_t cache_hits = 0;
    size_t cache_misses = 0;
    double wall_time_s = 0.0;
    double worst_stage_failure_rate = 0.0;
};

namespace detail {

inline void write_run_meta(const RunPaths& paths, const PipelineConfig& config,
                           const TransformRunSummary& summary) {
    json meta;
    meta["config_hash"] = config.hash();
    meta["wall_time_s"] = summary.wall_time_s;
    meta["cache_hits"] = summary.cache_hits;
    meta["cache_misses"] = summary.cache_misses;
    meta["chains_total"] = summary.chains_total;
    meta["chains_resumed"] = summary.chains_resumed;
    json stages;
    for (const auto& [stage, c] : summary.counters) {
        json s;
        s["attempted"] = c.attempted;
        s["verified"] = c.verified;
        stages[to_string(stage)] = s;
    }
    meta["stages"] = stages;
    atomic_write_file(paths.meta(), meta.dump(2) + "\n");
}

}  // namespace detail

inline Stage parse_final_stage(const std::string& name) {
    if (name == "all" || name == "plan" || name == "planning") return Stage::planning;
    if (name == "rename") return Stage::rename;
    if (name == "modular") return Stage::modular;
    throw std::runtime_error("unknown stage: " + name);
}

// The transform subcommand body. Re-entrant by construction: chains already
// carried to the final stage in the run dir are loaded as-is; everything
// else replays through the model-call cache, so an interrupted run continues
// to byte-identical outputs.
inline TransformRunSummary transform_run(const RunPaths& paths, const PipelineConfig& config,
                                         std::shared_ptr<CachingClient> client = nullptr,
                                         const std::string& stage_name = "all") {
    auto started = std::chrono::steady_clock::now();
    check_or_write_config_snapshot(paths, config);
    if (!client) client = make_cached_client(config, paths);

    Dataset ds = load_dataset(paths.run_dir, SchemaKind::native);
    if (ds.problems.empty()) throw std::runtime_error("transform: no problems in run dir (ingest first)");
    if (ds.solutions.empty()) throw std::runtime_error("transform: no solutions in run dir");

    TransformConfig tc = config.transform_config();
    tc.final_stage = parse_final_stage(stage_name);

    // Output scan: chains already carried to the final stage are done.
    std::map<std::string, std::vector<TransformRecord>> done_chains;
    {
        std::set<std::string> completed;
        for (const auto& r : ds.records)
            if (r.stage == tc.final_stage && r.verified)
                completed.insert(r.problem_id + "\x1f" + r.solution_id);
        for (const auto& r : ds.records) {
            std::string key = r.problem_id + "\x1f" + r.solution_id;
            if (completed.count(key)) done_chains[key].push_back(r);
        }
    }

    Dataset remaining = ds;
    remaining.records.clear();
    remaining.solutions.clear();
    for (const auto& s : ds.solutions)
        if (!done_chains.count(s.problem_id + "\x1f" + s.solution_id)) remaining.solutions.push_back(s);

    PipelineResult fresh = run_pipeline(remaining, *client, tc);

    // Merge finished chains with fresh results, preserving solution order.
    std::map<Stage, std::vector<TransformRecord>> by_stage;
    for (Stage stage : all_stages()) by_stage[stage];
    std::map<std::string, std::map<Stage, std::vector<TransformRecord>>> fresh_by_key;
    for (auto& [stage, records] : fresh.by_stage)
        for (auto& r : records) fresh_by_key[r.problem_id + "\x1f" + r.solution_id][stage].push_back(r);

    TransformRunSummary summary;
    for (const auto& s : ds.solutions) {
        std::string key = s.problem_id + "\x1f" + s.solution_id;
        ++summary.chains_total;
        if (auto it = done_chains.find(key); it != done_chains.end()) {
            ++summary.chains_resumed;
            for (const auto& r : it->second) by_stage[r.stage].push_back(r);
            for (Stage stage : {Stage::rename, Stage::modular, Stage::planning}) {
                if (static_cast<int>(stage) > static_cast<int>(tc.final_stage)) break;
                ++summary.counters[stage].attempted;
                ++summary.counters[stage].verified;
            }
            continue;
        }
        if (auto it = fresh_by_key.find(key); it != fresh_by_key.end())
            for (auto& [stage, records] : it->second)
                for (auto& r : records) by_stage[stage].push_back(r);
    }
    for (const auto& [stage, c] : fresh.counters) {
        summary.counters[stage].attempted += c.attempted;
        summary.counters[stage].verified += c.verified;
    }

    std::vector<TransformRecord> all;
    for (Stage stage : all_stages())
        all.insert(all.end(), by_stage[stage].begin(), by_stage[stage].end());
    summary.manifest = write_parallel(all, paths.run_dir);

    for (const auto& [stage, c] : summary.counters)
        if (c.attempted > 0)
            summary.worst_stage_failure_rate =
                std::max(summary.worst_stage_failure_rate, 1.0 - c.success_rate());
    summary.cache_hits = client->cache_hits();
    summary.cache_misses = client->cache_misses();
    summary.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    detail::write_run_meta(paths, config, summary);
    return summary;
}

// Ground-truth few-shot bank for the distillation baseline: the first
// examples from the run's modular records.
inline std::vector<FewShotSet> fewshot_bank_from_modular(const Dataset& ds, int sets) {
    std::vector<FewShotSet> bank;
    std::vector<FewShotExample> pool;
    for (const auto& r : ds.records) {
        if (r.stage != Stage::modular || !r.verified) continue;
        const Problem* p = ds.find_problem(r.problem_id);
        if (!p) continue;
        pool.push_back({p->statement, r.source});
    }
    if (pool.size() < static_cast<size_t>(2 * sets))
        throw std::runtime_error("distill: need at least " + std::to_string(2 * sets) +
                                 " modular examples for the few-shot bank");
    for (int i = 0; i < sets; ++i)
        bank.push_back({pool[2 * i], pool[2 * i + 1]});
    return bank;
}

struct DistillSummary {
    size_t problems = 0;
    size_t solutions_kept = 0;
    size_t completions_issued = 0;
};

// Distillation baseline over every problem in the run dir, few-shot prompts
// drawn from the modular dataset. Generated records land in the distill
// stage file alongside the transform outputs.
inline DistillSummary distill_run(const RunPaths& paths, const PipelineConfig& config,
                                  std::shared_ptr<CachingClient> client = nullptr) {
    check_or_write_config_snapshot(paths, config);
    if (!client) client = make_cached_client(config, paths);
    Dataset ds = load_dataset(paths.run_dir, SchemaKind::native);
    auto bank = fewshot_bank_from_modular(ds, config.distill_fewshot_sets);
    DistillConfig dc = config.distill_config();

    DistillSummary summary;
    size_t issued_before = client->cache_hits() + client->cache_misses();
    std::vector<TransformRecord> records = ds.records;
    records.erase(std::remove_if(records.begin(), records.end(),
                                 [](const TransformRecord& r) { return r.stage == Stage::distill; }),
                  records.end());
    for (const auto& p : ds.problems) {
        if (p.tests.empty()) continue;
        ++summary.problems;
        std::vector<AttemptFailure> failures;
        auto kept = generate_distill(p, bank, *client, dc, &failures);
        summary.solutions_kept += kept.size();
        for (const auto& sol : kept) {
            TransformRecord r;
            r.problem_id = sol.problem_id;
            r.solution_id = sol.solution_id;
            r.stage = Stage::distill;
            r.source = sol.source;
            r.verified = true;
            r.attempts_used = 1;
            r.model_id = config.model_id;
            records.push_back(std::move(r));
        }
    }
    summary.completions_issued = client->cache_hits() + client->cache_misses() - issued_before;
    write_parallel(records, paths.run_dir);
    return summary;
}

}  // namespace codeclean
