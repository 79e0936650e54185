// Command-line surface for the corpus-cleaning pipeline: ingest -> dedup ->
// transform -> distill/analyze/eval/judge -> report, all operating on a run
// directory that holds the config snapshot, datasets, cache, and reports.

#include <CLI11.hpp>

#include <iostream>

#include "codeclean/config.hpp"
#include "codeclean/model_client_live.hpp"
#include "codeclean/orchestrate.hpp"
#include "codeclean/report.hpp"

using namespace codeclean;

namespace {

struct CommonArgs {
    std::string run_dir;
    std::string config_file;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--run-dir", args.run_dir, "Run directory (outputs, cache, reports)")
        ->required();
    cmd->add_option("--config", args.config_file, "Config file with flat dotted keys");
}

PipelineConfig load_config(const CommonArgs& args) {
    PipelineConfig config;
    if (!args.config_file.empty()) apply_config_file(config, args.config_file);
    return config;
}

std::shared_ptr<CachingClient> make_client(const PipelineConfig& config, const RunPaths& paths) {
    std::unique_ptr<ModelClient> live;
    if (config.model_backend == "live") live = std::make_unique<LiveClient>();
    return make_cached_client(config, paths, std::move(live));
}

std::vector<long long> parse_k_list(const std::string& spec) {
    std::vector<long long> ks;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!strip(item).empty()) ks.push_back(std::stoll(strip(item)));
    if (ks.empty()) throw std::runtime_error("--k: no values given");
    return ks;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Competitive-programming corpus cleaning pipeline"};
    app.require_subcommand(1);

    CommonArgs args;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Load a dataset into a run directory");
    std::string input, schema_name = "native", platforms;
    bool verify = false;
    add_common(ingest, args);
    ingest->add_option("--input", input, "Source dataset (file or directory)")->required();
    ingest->add_option("--schema", schema_name, "apps | code_contests | native");
    ingest->add_option("--platforms", platforms, "Comma-separated platform allow-list");
    ingest->add_flag("--verify", verify, "Verify solutions against the execution oracle");

    // dedup
    auto* dedup_cmd = app.add_subcommand("dedup", "Near-deduplicate solutions per problem");
    std::optional<size_t> cap;
    std::optional<uint64_t> seed_flag;
    std::optional<double> confirm;
    add_common(dedup_cmd, args);
    dedup_cmd->add_option("--cap", cap, "Max solutions kept per problem");
    dedup_cmd->add_option("--seed", seed_flag, "Root seed for the minhash permutations");
    dedup_cmd->add_option("--confirm-threshold", confirm, "Estimated-Jaccard collapse threshold");

    // transform
    auto* transform_cmd = app.add_subcommand("transform", "Run the staged cleaning pipeline");
    std::string stage_name = "all", model_spec, cache_dir;
    std::optional<int> max_attempts, jobs;
    std::optional<double> temperature;
    add_common(transform_cmd, args);
    transform_cmd->add_option("--stage", stage_name, "rename | modular | plan | all");
    transform_cmd->add_option("--max-attempts", max_attempts, "Sampling budget per stage");
    transform_cmd->add_option("--temperature", temperature, "Sampling temperature");
    transform_cmd->add_option("--jobs", jobs, "Parallel workers");
    transform_cmd->add_option("--cache-dir", cache_dir, "Model-call cache directory");
    transform_cmd->add_option("--model", model_spec, "live | fixture:<dir> | mock:echo | mock:<script>");

    // distill
    auto* distill_cmd = app.add_subcommand("distill", "Direct-generation baseline dataset");
    std::optional<int> per_prompt, fewshot_sets;
    std::optional<double> distill_temp;
    std::string distill_model;
    add_common(distill_cmd, args);
    distill_cmd->add_option("--per-prompt", per_prompt, "Samples per few-shot prompt");
    distill_cmd->add_option("--fewshot-sets", fewshot_sets, "Number of few-shot example sets");
    distill_cmd->add_option("--temperature", distill_temp, "Sampling temperature");
    distill_cmd->add_option("--model", distill_model, "Model backend spec");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Structural statistics of the run");
    bool want_stats = false, want_clusters = false;
    size_t top_n = 20;
    add_common(analyze_cmd, args);
    analyze_cmd->add_flag("--stats", want_stats, "Emit per-stage and inserted-function stats");
    analyze_cmd->add_flag("--clusters", want_clusters, "Emit helper-name clusters");
    analyze_cmd->add_option("--top", top_n, "Cluster rows to keep");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "pass@k over externally generated samples");
    std::string samples_path, k_spec = "1,10,100";
    add_common(eval_cmd, args);
    eval_cmd->add_option("--samples", samples_path, "samples.jsonl path")->required();
    eval_cmd->add_option("--k", k_spec, "Comma-separated k values");

    // judge
    auto* judge_cmd = app.add_subcommand("judge", "Model-judged quality of transformations");
    std::string pairs_path, judge_model_spec;
    std::optional<size_t> judge_limit;
    add_common(judge_cmd, args);
    judge_cmd->add_option("--pairs", pairs_path,
                          "pairs.jsonl ({pair_id, statement, original, refactored}); "
                          "defaults to the run's original/modular pairs");
    judge_cmd->add_option("--model", judge_model_spec, "Model backend spec");
    judge_cmd->add_option("--limit", judge_limit, "Judge at most this many pairs");

    // report
    auto* report_cmd = app.add_subcommand("report", "Collate reports from run artifacts");
    add_common(report_cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        PipelineConfig config = load_config(args);
        RunPaths paths{args.run_dir};

        if (*ingest) {
            auto schema = schema_from_string(schema_name);
            if (!schema) throw std::runtime_error("unknown schema: " + schema_name);
            std::set<std::string> allowed;
            std::stringstream ss(platforms);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!strip(item).empty()) allowed.insert(strip(item));
            IngestSummary s = ingest_run(paths, input, *schema, config, allowed, verify);
            std::cout << "ingested " << s.problems << " problems, " << s.solutions
                      << " solutions (" << s.quarantined << " quarantined";
            if (verify) std::cout << ", " << s.dropped_unverified << " dropped by the oracle";
            std::cout << ")\n";
        } else if (*dedup_cmd) {
            if (cap) config.dedup_cap = *cap;
            if (seed_flag) config.seed = *seed_flag;
            if (confirm) config.dedup_confirm_threshold = *confirm;
            DedupSummary s = dedup_run(paths, config);
            std::cout << "dedup kept " << s.kept << " solutions, dropped " << s.dropped << " ("
                      << paths.dedup_report().string() << ")\n";
        } else if (*transform_cmd) {
            if (max_attempts) config.transform_max_attempts = *max_attempts;
            if (temperature) config.transform_temperature = *temperature;
            if (jobs) config.jobs = *jobs;
            if (!cache_dir.empty()) config.cache_dir = cache_dir;
            if (!model_spec.empty()) config.model_backend = model_spec;
            TransformRunSummary s =
                transform_run(paths, config, make_client(config, paths), stage_name);
            std::cout << "transform wrote " << paths.manifest().string() << "; chains "
                      << s.chains_total << " (" << s.chains_resumed << " resumed), cache "
                      << s.cache_hits << " hits / " << s.cache_misses << " misses\n";
            for (const auto& [stage, c] : s.counters)
                std::cout << "  " << to_string(stage) << ": " << c.verified << "/" << c.attempted
                          << " verified\n";
            if (s.worst_stage_failure_rate > config.failure_exit_threshold) {
                std::cerr << "warning: per-record failure rate "
                          << static_cast<int>(100 * s.worst_stage_failure_rate)
                          << "% exceeds the threshold\n";
                return 1;
            }
        } else if (*distill_cmd) {
            if (per_prompt) config.distill_per_prompt = *per_prompt;
            if (fewshot_sets) config.distill_fewshot_sets = *fewshot_sets;
            if (distill_temp) config.distill_temperature = *distill_temp;
            if (!distill_model.empty()) config.model_backend = distill_model;
            DistillSummary s = distill_run(paths, config, make_client(config, paths));
            std::cout << "distill kept " << s.solutions_kept << " solutions over " << s.problems
                      << " problems (" << s.completions_issued << " completions)\n";
        } else if (*analyze_cmd) {
            (void)want_stats;
            (void)want_clusters;  // both sections always land in the artifacts
            write_analysis_report(paths, top_n);
            std::cout << "analysis written to " << (paths.reports() / "analysis.md").string() << "\n";
        } else if (*eval_cmd) {
            Dataset ds = load_dataset(paths.run_dir, SchemaKind::native);
            auto sample_sets = load_sample_sets(samples_path);
            OracleConfig oracle = config.oracle_config();
            PassAtKReport report = evaluate(
                sample_sets, ds,
                [&](const Problem& p, const std::string& src) {
                    return check_solution(src, p.tests, oracle).overall;
                },
                parse_k_list(k_spec));
            write_eval_report(paths, report);
            std::cout << "pass@k written to " << (paths.reports() / "passk.md").string() << "\n";
            for (const auto& [k, v] : report.per_k) std::cout << "  pass@" << k << " = " << v << "\n";
        } else if (*judge_cmd) {
            if (!judge_model_spec.empty()) config.model_backend = judge_model_spec;
            std::vector<JudgePair> pairs;
            if (!pairs_path.empty()) {
                detail::for_each_jsonl_line(pairs_path, [&](const std::string& line) {
                    if (strip(line).empty()) return;
                    json j = json::parse(line);
                    JudgePair pair;
                    pair.pair_id = j.value("pair_id", std::to_string(pairs.size()));
                    pair.problem.id = pair.pair_id;
                    pair.problem.statement = j.at("statement").get<std::string>();
                    pair.original = j.at("original").get<std::string>();
                    pair.refactored = j.at("refactored").get<std::string>();
                    pairs.push_back(std::move(pair));
                });
            } else {
                Dataset ds = load_dataset(paths.run_dir, SchemaKind::native);
                std::map<std::string, const TransformRecord*> originals;
                for (const auto& r : ds.records)
                    if (r.stage == Stage::original)
                        originals[r.problem_id + "\x1f" + r.solution_id] = &r;
                for (const auto& r : ds.records) {
                    if (r.stage != Stage::modular || !r.verified) continue;
                    auto it = originals.find(r.problem_id + "\x1f" +
                                             r.parent_solution_id.value_or(r.solution_id));
                    const Problem* p = ds.find_problem(r.problem_id);
                    if (it == originals.end() || !p) continue;
                    JudgePair pair;
                    pair.pair_id = r.problem_id + "/" + r.solution_id;
                    pair.problem = *p;
                    pair.original = it->second->source;
                    pair.refactored = r.source;
                    pairs.push_back(std::move(pair));
                }
            }
            if (judge_limit && pairs.size() > *judge_limit) pairs.resize(*judge_limit);
            if (pairs.empty()) throw std::runtime_error("judge: no pairs to evaluate");
            auto client = make_client(config, paths);
            JudgeConfig jc;
            jc.model_id = config.judge_model_id;
            JudgeRun run = run_judge(pairs, *client, jc);
            write_transcripts(run.transcripts, paths.judge_transcripts());
            write_judge_report(paths, run.aggregate);
            std::cout << "judged " << run.transcripts.size() << " pairs ("
                      << run.aggregate.malformed_count << " malformed); report at "
                      << (paths.reports() / "judge.md").string() << "\n";
        } else if (*report_cmd) {
            emit_report(paths);
            std::cout << "report written to " << (paths.reports() / "report.md").string() << "\n";
        }
        return 0;
    } catch (const ConfigMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
