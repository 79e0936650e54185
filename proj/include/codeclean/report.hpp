#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "codeclean/code_analysis.hpp"
#include "codeclean/eval.hpp"
#include "codeclean/judge.hpp"
#include "codeclean/orchestrate.hpp"

namespace codeclean {

namespace detail {

inline std::string fmt(double v, int precision = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

}  // namespace detail

struct AnalysisArtifacts {
    std::map<std::string, StageCounters> stage_counters;
    InsertedFunctionStats inserted;
    ClusterReport clusters;
};

// analyze subcommand: structural statistics over the run's parallel
// datasets, persisted as JSON (for `report`) plus CSV and markdown.
inline AnalysisArtifacts write_analysis_report(const RunPaths& paths, size_t top_n = 20) {
    Dataset ds = load_dataset(paths.run_dir, SchemaKind::native);
    std::vector<TransformRecord> originals, modular;
    for (const auto& r : ds.records) {
        if (r.stage == Stage::original) originals.push_back(r);
        if (r.stage == Stage::modular) modular.push_back(r);
    }
    if (originals.empty() || modular.empty())
        throw std::runtime_error("analyze: missing original/modular records (run transform first)");

    AnalysisArtifacts art;
    art.inserted = inserted_function_stats(originals, modular);
    art.clusters = cluster_helpers(modular);
    if (std::filesystem::exists(paths.meta())) {
        json meta = json::parse(read_file(paths.meta()));
        for (auto it = meta["stages"].begin(); it != meta["stages"].end(); ++it) {
            StageCounters c;
            c.attempted = it.value().value("attempted", 0u);
            c.verified = it.value().value("verified", 0u);
            art.stage_counters[it.key()] = c;
        }
    }

    std::vector<std::pair<std::string, ClusterEntry>> ranked(art.clusters.clusters.begin(),
                                                             art.clusters.clusters.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second.occurrences > b.second.occurrences;
    });
    if (ranked.size() > top_n) ranked.resize(top_n);

    std::filesystem::create_directories(paths.reports());

    json j;
    j["inserted_functions"] = {{"median", art.inserted.median},
                               {"mean", art.inserted.mean},
                               {"pairs", art.inserted.counts.size()}};
    json stages;
    for (const auto& [stage, c] : art.stage_counters)
        stages[stage] = {{"attempted", c.attempted},
                         {"verified", c.verified},
                         {"success_rate", c.success_rate()}};
    j["stages"] = stages;
    json clusters = json::array();
    for (const auto& [name, entry] : ranked)
        clusters.push_back({{"name", name},
                            {"occurrences", entry.occurrences},
                            {"problem_frequency", entry.problem_frequency}});
    j["clusters"] = clusters;
    atomic_write_file(paths.reports() / "analysis.json", j.dump(2) + "\n");

    std::string csv = "cluster,occurrences,problem_frequency\n";
    for (const auto& [name, entry] : ranked)
        csv += name + "," + std::to_string(entry.occurrences) + "," +
               detail::fmt(entry.problem_frequency) + "\n";
    atomic_write_file(paths.reports() / "analysis.csv", csv);

    std::string md = "# Transformation analysis\n\n";
    md += "Inserted functions per modularized program: median " +
          detail::fmt(art.inserted.median, 1) + ", mean " + detail::fmt(art.inserted.mean, 2) +
          " over " + std::to_string(art.inserted.counts.size()) + " pairs.\n\n";
    if (!art.stage_counters.empty()) {
        md += "| Stage | Attempted | Verified | Success rate |\n|---|---|---|---|\n";
        for (const auto& [stage, c] : art.stage_counters)
            md += "| " + stage + " | " + std::to_string(c.attempted) + " | " +
                  std::to_string(c.verified) + " | " + detail::fmt(c.success_rate()) + " |\n";
        md += "\n";
    }
    md += "| Helper | Occurrences | Problem frequency |\n|---|---|---|\n";
    for (const auto& [name, entry] : ranked)
        md += "| `" + name + "` | " + std::to_string(entry.occurrences) + " | " +
              detail::fmt(entry.problem_frequency) + " |\n";
    atomic_write_file(paths.reports() / "analysis.md", md);
    return art;
}

// eval subcommand output: per-k columns as CSV and markdown plus JSON.
inline void write_eval_report(const RunPaths& paths, const PassAtKReport& report) {
    std::filesystem::create_directories(paths.reports());
    json j;
    json per_k;
    for (const auto& [k, v] : report.per_k) per_k["pass@" + std::to_string(k)] = v;
    j["per_k"] = per_k;
    json rows = json::array();
    for (const auto& p : report.per_problem)
        rows.push_back({{"problem_id", p.problem_id}, {"n", p.n}, {"c", p.c}});
    j["per_problem"] = rows;
    atomic_write_file(paths.reports() / "passk.json", j.dump(2) + "\n");

    std::string header = "problem_id,n,c";
    std::string md_header = "| problem | n | c |";
    std::string md_sep = "|---|---|---|";
    for (const auto& [k, v] : report.per_k) {
        header += ",pass@" + std::to_string(k);
        md_header += " pass@" + std::to_string(k) + " |";
        md_sep += "---|";
    }
    std::string csv = header + "\n";
    for (const auto& p : report.per_problem) {
        csv += p.problem_id + "," + std::to_string(p.n) + "," + std::to_string(p.c);
        for (const auto& [k, v] : report.per_k) csv += "," + detail::fmt(pass_at_k(p.n, p.c, k), 6);
        csv += "\n";
    }
    csv += "mean,,";
    for (const auto& [k, v] : report.per_k) csv += "," + detail::fmt(v, 6);
    csv += "\n";
    atomic_write_file(paths.reports() / "passk.csv", csv);

    std::string md = "# pass@k\n\n" + md_header + "\n" + md_sep + "\n";
    md += "| **mean** | | |";
    for (const auto& [k, v] : report.per_k) md += " " + detail::fmt(v, 4) + " |";
    md += "\n";
    atomic_write_file(paths.reports() / "passk.md", md);
}

inline std::string histogram_text(const std::map<int, size_t>& dist) {
    // Highest score first, mirroring the reporting convention.
    std::string out = "{";
    bool first = true;
    for (auto it = dist.rbegin(); it != dist.rend(); ++it) {
        if (!first) out += ", ";
        first = false;
        out += std::to_string(it->first) + ": " + std::to_string(it->second);
    }
    return out + "}";
}

// judge subcommand output: the three-dimension table plus both averaging
// denominators, flagging the mismatch when malformed responses exist.
inline void write_judge_report(const RunPaths& paths, const JudgeAggregate& agg) {
    std::filesystem::create_directories(paths.reports());
    size_t total = agg.parsed_count + agg.malformed_count;

    json j;
    auto dim_json = [](const DimensionAggregate& d) {
        json out;
        json dist;
        for (const auto& [score, count] : d.distribution) dist[std::to_string(score)] = count;
        out["distribution"] = dist;
        out["average_by_counts"] = d.average_by_counts;
        out["average_by_total"] = d.average_by_total;
        return out;
    };
    j["variable_names"] = dim_json(agg.variable_names);
    j["function_decomposition"] = dim_json(agg.decomposition);
    j["consistency"] = dim_json(agg.consistency);
    j["parsed_count"] = agg.parsed_count;
    j["malformed_count"] = agg.malformed_count;
    j["denominator_discrepancy"] = agg.denominator_discrepancy;
    atomic_write_file(paths.reports() / "judge.json", j.dump(2) + "\n");

    std::string md = "# Judge evaluation\n\n";
    md += "| Dimension | Score distribution | Average (all " + std::to_string(total) +
          ") | Average (scored " + std::to_string(agg.parsed_count) + ") |\n|---|---|---|---|\n";
    auto row = [&](const char* label, const DimensionAggregate& d) {
        md += std::string("| ") + label + " | " + histogram_text(d.distribution) + " | " +
              detail::fmt(d.average_by_total) + " | " + detail::fmt(d.average_by_counts) + " |\n";
    };
    row("Variable names", agg.variable_names);
    row("Function decomposition", agg.decomposition);
    row("Consistency", agg.consistency);
    md += "\nScored responses: " + std::to_string(agg.parsed_count) + " of " + std::to_string(total) +
          " (" + std::to_string(agg.malformed_count) + " malformed).\n";
    if (agg.denominator_discrepancy)
        md += "Note: the per-histogram and all-responses averaging denominators disagree (" +
              std::to_string(agg.parsed_count) + " vs " + std::to_string(total) +
              "); both averages are reported.\n";
    atomic_write_file(paths.reports() / "judge.md", md);
}

// report subcommand: collate whatever artifacts exist into one markdown +
// CSV pair; at least one artifact must exist.
inline void emit_report(const RunPaths& paths) {
    std::vector<std::string> missing;
    std::string md = "# Run report\n\n";
    std::string csv;

    if (std::filesystem::exists(paths.meta())) {
        json meta = json::parse(read_file(paths.meta()));
        md += "## Stage success\n\n| Stage | Attempted | Verified | Success rate |\n|---|---|---|---|\n";
        csv += "section,key,value\n";
        for (auto it = meta["stages"].begin(); it != meta["stages"].end(); ++it) {
            size_t attempted = it.value().value("attempted", 0u);
            size_t verified = it.value().value("verified", 0u);
            double rate = attempted == 0 ? 0.0 : static_cast<double>(verified) / attempted;
            md += "| " + it.key() + " | " + std::to_string(attempted) + " | " +
                  std::to_string(verified) + " | " + detail::fmt(rate) + " |\n";
            csv += "stage_success," + it.key() + "," + detail::fmt(rate) + "\n";
        }
        md += "\n";
    } else {
        missing.push_back("run_meta.json (transform)");
    }

    auto analysis = paths.reports() / "analysis.json";
    if (std::filesystem::exists(analysis)) {
        json a = json::parse(read_file(analysis));
        md += "## Inserted functions\n\nMedian " +
              detail::fmt(a["inserted_functions"]["median"].get<double>(), 1) + ", mean " +
              detail::fmt(a["inserted_functions"]["mean"].get<double>(), 2) + ".\n\n";
        md += "## Top helpers\n\n| Helper | Occurrences | Problem frequency |\n|---|---|---|\n";
        for (const auto& c : a["clusters"])
            md += "| `" + c["name"].get<std::string>() + "` | " +
                  std::to_string(c["occurrences"].get<size_t>()) + " | " +
                  detail::fmt(c["problem_frequency"].get<double>()) + " |\n";
        md += "\n";
        csv += "inserted_functions,median," + detail::fmt(a["inserted_functions"]["median"].get<double>()) + "\n";
        csv += "inserted_functions,mean," + detail::fmt(a["inserted_functions"]["mean"].get<double>()) + "\n";
    } else {
        missing.push_back("reports/analysis.json (analyze)");
    }

    auto passk = paths.reports() / "passk.json";
    if (std::filesystem::exists(passk)) {
        json p = json::parse(read_file(passk));
        md += "## pass@k\n\n|";
        std::string sep = "|", vals = "|";
        for (auto it = p["per_k"].begin(); it != p["per_k"].end(); ++it) {
            md += " " + it.key() + " |";
            sep += "---|";
            vals += " " + detail::fmt(it.value().get<double>(), 4) + " |";
            csv += "pass_at_k," + it.key() + "," + detail::fmt(it.value().get<double>(), 6) + "\n";
        }
        md += "\n" + sep + "\n" + vals + "\n\n";
    } else {
        missing.push_back("reports/passk.json (eval)");
    }

    auto judge = paths.reports() / "judge.json";
    if (std::filesystem::exists(judge)) {
        json jj = json::parse(read_file(judge));
        size_t total = jj["parsed_count"].get<size_t>() + jj["malformed_count"].get<size_t>();
        md += "## Judge scores\n\n| Dimension | Average (all " + std::to_string(total) + ") |\n|---|---|\n";
        for (const char* dim : {"variable_names", "function_decomposition", "consistency"}) {
            md += std::string("| ") + dim + " | " +
                  detail::fmt(jj[dim]["average_by_total"].get<double>()) + " |\n";
            csv += std::string("judge,") + dim + "," +
                   detail::fmt(jj[dim]["average_by_total"].get<double>()) + "\n";
        }
        if (jj.value("denominator_discrepancy", false))
            md += "\nNote: scored-response and all-response denominators disagree; see "
                  "reports/judge.md for both averages.\n";
        md += "\n";
    } else {
        missing.push_back("reports/judge.json (judge)");
    }

    if (missing.size() == 4) {
        std::string message = "report: no artifacts found in run dir; missing: ";
        for (size_t i = 0; i < missing.size(); ++i) message += (i ? ", " : "") + missing[i];
        throw std::runtime_error(message);
    }
    if (!missing.empty()) {
        md += "## Missing artifacts\n\n";
        for (const auto& m : missing) md += "- " + m + "\n";
    }

    std::filesystem::create_directories(paths.reports());
    atomic_write_file(paths.reports() / "report.md", md);
    atomic_write_file(paths.reports() / "report.csv", csv.empty() ? "section,key,value\n" : csv);
}

}  // namespace codeclean
