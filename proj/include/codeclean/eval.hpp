#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "codeclean/dataset.hpp"

namespace codeclean {

// Unbiased estimator 1 - C(n-c,k)/C(n,k) in product form, stable for n up to
// at least 10000 (no factorials).
inline double pass_at_k(long long n, long long c, long long k) {
    if (n < 0 || c < 0 || c > n) throw std::invalid_argument("pass_at_k: require 0 <= c <= n");
    if (k < 1) throw std::invalid_argument("pass_at_k: require k >= 1");
    if (k > n) throw std::invalid_argument("pass_at_k: insufficient samples (k > n)");
    if (c == 0) return 0.0;
    if (k > n - c) return 1.0;
    double prod = 1.0;
    for (long long i = n - c + 1; i <= n; ++i)
        prod *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    return 1.0 - prod;
}

enum class PassMetric { pass_at_1, pass_at_10, pass_at_25, pass_at_100 };

struct SamplingConfig {
    int budget = 0;  // N, the number of samples drawn per problem
    double temperature = 0.0;
};

inline SamplingConfig sampling_config(PassMetric metric) {
    switch (metric) {
        case PassMetric::pass_at_1: return {10, 0.1};
        case PassMetric::pass_at_10: return {50, 0.6};
        case PassMetric::pass_at_25: return {50, 0.6};
        case PassMetric::pass_at_100: return {200, 0.8};
    }
    throw std::invalid_argument("sampling_config: unknown metric");
}

inline std::optional<PassMetric> pass_metric_from_string(const std::string& s) {
    if (s == "pass@1") return PassMetric::pass_at_1;
    if (s == "pass@10") return PassMetric::pass_at_10;
    if (s == "pass@25") return PassMetric::pass_at_25;
    if (s == "pass@100") return PassMetric::pass_at_100;
    return std::nullopt;
}

struct SampleSet {
    std::string problem_id;
    std::vector<std::string> samples;
};

inline SampleSet sample_set_from_json(const json& j) {
    SampleSet s;
    s.problem_id = detail::require_field(j, "problem_id").get<std::string>();
    s.samples = detail::string_list(detail::require_field(j, "samples"));
    return s;
}

inline std::vector<SampleSet> load_sample_sets(const std::filesystem::path& path) {
    std::vector<SampleSet> out;
    detail::for_each_jsonl_line(path, [&](const std::string& line) {
        if (strip(line).empty()) return;
        out.push_back(sample_set_from_json(json::parse(line)));
    });
    return out;
}

struct ProblemPassCounts {
    std::string problem_id;
    long long n = 0;
    long long c = 0;
};

struct PassAtKReport {
    std::vector<ProblemPassCounts> per_problem;
    std::map<long long, double> per_k;  // k -> unweighted mean over problems
};

// Counts correct samples per problem with the supplied checker, then
// aggregates the estimator as an unweighted mean over problems.
inline PassAtKReport evaluate(
    const std::vector<SampleSet>& sample_sets, const Dataset& problems,
    const std::function<bool(const Problem&, const std::string& source)>& check,
    const std::vector<long long>& ks) {
    if (ks.empty()) throw std::invalid_argument("evaluate: no k values");
    PassAtKReport report;
    long long max_k = 0;
    for (long long k : ks) max_k = std::max(max_k, k);
    for (const auto& set : sample_sets) {
        const Problem* p = problems.find_problem(set.problem_id);
        if (!p) throw std::runtime_error("evaluate: unknown problem " + set.problem_id);
        if (static_cast<long long>(set.samples.size()) < max_k)
            throw std::runtime_error("evaluate: insufficient samples for problem " + set.problem_id);
        ProblemPassCounts counts;
        counts.problem_id = set.problem_id;
        counts.n = static_cast<long long>(set.samples.size());
        for (const auto& sample : set.samples)
            if (check(*p, sample)) ++counts.c;
        report.per_problem.push_back(counts);
    }
    for (long long k : ks) {
        double sum = 0.0;
        for (const auto& counts : report.per_problem) sum += pass_at_k(counts.n, counts.c, k);
        report.per_k[k] = report.per_problem.empty() ? 0.0 : sum / report.per_problem.size();
    }
    return report;
}

}  // namespace codeclean
