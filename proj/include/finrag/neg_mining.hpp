#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "finrag/context_rank.hpp"
#include "finrag/corpus.hpp"

namespace finrag {

// Four similarity scores per candidate, in fixed order
// [s_tfidf, s_bm25, s_emb_primary, s_emb_secondary], min-max normalized to
// [0,1] per dimension across the candidate set.
struct SimilarityFeatureVector {
    std::string unit_id;
    std::array<double, 4> v{0.0, 0.0, 0.0, 0.0};
};

enum class PairLabel { positive, negative };
enum class PairOrigin { gold, cluster_knn, random_sample, self_mined };

std::string to_string(PairLabel label);
std::string to_string(PairOrigin origin);

struct TrainingPair {
    std::string query;
    std::string unit_id;
    std::string context;  // unit content
    PairLabel label = PairLabel::negative;
    PairOrigin origin = PairOrigin::gold;
};

// The four scorer slots behind Eq.-2-style feature vectors. The embedding
// slots take any two configured backends; `offline()` fills them with two
// differently sized hash embedders so mining runs with no network at all.
struct MiningScorers {
    std::shared_ptr<RelevanceScorer> tfidf;
    std::shared_ptr<RelevanceScorer> bm25;
    std::shared_ptr<RelevanceScorer> emb_primary;
    std::shared_ptr<RelevanceScorer> emb_secondary;

    static MiningScorers offline();
};

std::vector<SimilarityFeatureVector> build_feature_vectors(const std::string& query,
                                                           const std::vector<ContextUnit>& candidates,
                                                           const MiningScorers& scorers);

// For each positive unit, the k nearest non-positive candidates by Euclidean
// distance over the normalized feature vectors (ties by unit_id ascending),
// deduplicated across positives. Positives are emitted as (positive, gold)
// pairs, mined units as (negative, cluster_knn).
std::vector<TrainingPair> mine_cluster_negatives(const std::string& query,
                                                 const std::vector<std::string>& positives,
                                                 const std::vector<ContextUnit>& candidates,
                                                 const MiningScorers& scorers, int k = 1);

// Same, over precomputed feature vectors (must be aligned with candidates).
std::vector<TrainingPair> mine_cluster_negatives(const std::string& query,
                                                 const std::vector<std::string>& positives,
                                                 const std::vector<ContextUnit>& candidates,
                                                 const std::vector<SimilarityFeatureVector>& vectors,
                                                 int k = 1);

// Uniform sample of `count` non-positive candidates without replacement,
// reproducible from the explicit seed on every platform.
std::vector<TrainingPair> mine_random_negatives(const std::string& query,
                                                const std::vector<std::string>& positives,
                                                const std::vector<ContextUnit>& candidates,
                                                int count, std::uint64_t seed);

// The `count` highest-scoring non-positive candidates under the scorer —
// the retriever's own confusions.
std::vector<TrainingPair> mine_self_negatives(const std::string& query,
                                              const std::vector<std::string>& positives,
                                              const std::vector<ContextUnit>& candidates,
                                              RelevanceScorer& scorer, int count);

// JSONL {query, context, label, origin}, ordered by (query asc,
// positives-before-negatives, unit_id asc). Returns lines written.
std::size_t export_training_set(const std::vector<TrainingPair>& pairs,
                                const std::filesystem::path& path);

}  // namespace finrag
