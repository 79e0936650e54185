#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "codeclean/dataset.hpp"
#include "codeclean/pylex.hpp"
#include "codeclean/util.hpp"

namespace codeclean {

inline constexpr int kMinhashBands = 60;
inline constexpr int kMinhashRows = 5;
inline constexpr int kMinhashPerms = kMinhashBands * kMinhashRows;  // 300
inline constexpr int kDefaultShingleWidth = 5;
inline constexpr double kDefaultConfirmThreshold = 0.6;

struct ShingleSet {
    std::unordered_set<uint64_t> shingles;
    int k = kDefaultShingleWidth;
};

// Token k-gram hashes over comment-stripped, whitespace-normalized source.
// Sources shorter than k tokens collapse to the single hash of the whole
// token sequence; empty sources yield the empty set.
inline ShingleSet shingle(const std::string& source, int k = kDefaultShingleWidth) {
    if (k < 1) throw std::invalid_argument("shingle: k must be >= 1");
    ShingleSet set;
    set.k = k;
    auto tokens = lex_tokens(source).tokens;
    if (tokens.empty()) return set;

    auto gram_hash = [](const std::vector<std::string>& toks, size_t begin, size_t end) {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (size_t i = begin; i < end; ++i) {
            h = fnv1a64(toks[i], h);
            h = fnv1a64("\x1f", h);
        }
        return h;
    };

    if (tokens.size() < static_cast<size_t>(k)) {
        set.shingles.insert(gram_hash(tokens, 0, tokens.size()));
        return set;
    }
    for (size_t i = 0; i + k <= tokens.size(); ++i)
        set.shingles.insert(gram_hash(tokens, i, i + k));
    return set;
}

struct MinHashSignature {
    std::array<uint64_t, kMinhashPerms> values{};
    uint64_t seed = 0;

    bool is_empty_sentinel() const {
        for (uint64_t v : values)
            if (v != std::numeric_limits<uint64_t>::max()) return false;
        return true;
    }
};

// 300 independent hash streams derived from the seed; values[i] is the
// minimum of h_i over the shingle set. The empty set maps to the reserved
// all-max sentinel.
inline MinHashSignature minhash_signature(const ShingleSet& set, uint64_t seed) {
    MinHashSignature sig;
    sig.seed = seed;
    sig.values.fill(std::numeric_limits<uint64_t>::max());
    if (set.shingles.empty()) return sig;
    std::array<uint64_t, kMinhashPerms> stream_seeds;
    for (int i = 0; i < kMinhashPerms; ++i) stream_seeds[i] = splitmix64(seed + 1 + i);
    for (uint64_t shingle_hash : set.shingles)
        for (int i = 0; i < kMinhashPerms; ++i) {
            uint64_t h = splitmix64(shingle_hash ^ stream_seeds[i]);
            if (h < sig.values[i]) sig.values[i] = h;
        }
    return sig;
}

// Fraction of agreeing positions; the standard minhash Jaccard estimate.
inline double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.seed != b.seed) throw std::invalid_argument("estimate_jaccard: signature layout/seed mismatch");
    bool a_empty = a.is_empty_sentinel(), b_empty = b.is_empty_sentinel();
    if (a_empty || b_empty) return (a_empty && b_empty) ? 1.0 : 0.0;
    int agree = 0;
    for (int i = 0; i < kMinhashPerms; ++i)
        if (a.values[i] == b.values[i]) ++agree;
    return static_cast<double>(agree) / kMinhashPerms;
}

namespace detail {

inline uint64_t band_key(const MinHashSignature& sig, int band) {
    uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<uint64_t>(band);
    for (int r = 0; r < kMinhashRows; ++r) {
        uint64_t v = sig.values[band * kMinhashRows + r];
        h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&v), sizeof(v)), h);
    }
    return h;
}

}  // namespace detail

struct DedupOutcome {
    std::vector<size_t> kept;     // indices into the input, in input order
    std::vector<size_t> dropped;  // near-duplicates plus over-cap overflow
};

// LSH bucketing (any shared band -> candidate pair), confirmation by the
// estimator, earliest-seen survivor, then the retention cap.
inline DedupOutcome dedup_sources(const std::vector<std::string>& sources, size_t cap,
                                  uint64_t seed, double confirm_threshold = kDefaultConfirmThreshold,
                                  int shingle_width = kDefaultShingleWidth) {
    if (cap < 1) throw std::invalid_argument("dedup_sources: cap must be >= 1");
    DedupOutcome outcome;
    std::vector<MinHashSignature> sigs;
    sigs.reserve(sources.size());
    for (const auto& src : sources) sigs.push_back(minhash_signature(shingle(src, shingle_width), seed));

    std::map<std::pair<int, uint64_t>, std::vector<size_t>> buckets;
    std::vector<size_t> survivors;
    for (size_t i = 0; i < sources.size(); ++i) {
        std::set<size_t> candidates;
        std::array<uint64_t, kMinhashBands> keys;
        for (int b = 0; b < kMinhashBands; ++b) {
            keys[b] = detail::band_key(sigs[i], b);
            auto it = buckets.find({b, keys[b]});
            if (it != buckets.end()) candidates.insert(it->second.begin(), it->second.end());
        }
        bool duplicate = false;
        for (size_t earlier : candidates)
            if (estimate_jaccard(sigs[i], sigs[earlier]) >= confirm_threshold) {
                duplicate = true;
                break;
            }
        if (duplicate) {
            outcome.dropped.push_back(i);
            continue;
        }
        survivors.push_back(i);
        for (int b = 0; b < kMinhashBands; ++b) buckets[{b, keys[b]}].push_back(i);
    }
    for (size_t idx : survivors) {
        if (outcome.kept.size() < cap) outcome.kept.push_back(idx);
        else outcome.dropped.push_back(idx);
    }
    return outcome;
}

inline std::vector<Solution> dedup_solutions(const std::vector<Solution>& solutions, size_t cap,
                                             uint64_t seed,
                                             double confirm_threshold = kDefaultConfirmThreshold) {
    std::vector<std::string> sources;
    sources.reserve(solutions.size());
    for (const auto& s : solutions) sources.push_back(s.source);
    DedupOutcome outcome = dedup_sources(sources, cap, seed, confirm_threshold);
    std::vector<Solution> kept;
    kept.reserve(outcome.kept.size());
    for (size_t idx : outcome.kept) kept.push_back(solutions[idx]);
    return kept;
}

}  // namespace codeclean
