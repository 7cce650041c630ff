#include "finrag/neg_mining.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "finrag/errors.hpp"
#include "finrag/util.hpp"

namespace finrag {

using nlohmann::json;

std::string to_string(PairLabel label) {
    return label == PairLabel::positive ? "positive" : "negative";
}

std::string to_string(PairOrigin origin) {
    switch (origin) {
        case PairOrigin::gold: return "gold";
        case PairOrigin::cluster_knn: return "cluster_knn";
        case PairOrigin::random_sample: return "random";
        case PairOrigin::self_mined: return "self_mined";
    }
    return "gold";
}

MiningScorers MiningScorers::offline() {
    MiningScorers scorers;
    scorers.tfidf = std::make_shared<LexicalTfidfScorer>();
    scorers.bm25 = std::make_shared<LexicalBm25Scorer>();
    scorers.emb_primary = EmbeddingCosineScorer::hashing(64);
    scorers.emb_secondary = EmbeddingCosineScorer::hashing(128);
    return scorers;
}

std::vector<SimilarityFeatureVector> build_feature_vectors(
    const std::string& query, const std::vector<ContextUnit>& candidates,
    const MiningScorers& scorers) {
    if (candidates.empty()) throw DataError("build_feature_vectors: no candidates");
    const std::array<RelevanceScorer*, 4> slots{scorers.tfidf.get(), scorers.bm25.get(),
                                                scorers.emb_primary.get(),
                                                scorers.emb_secondary.get()};
    for (auto* slot : slots) {
        if (slot == nullptr) throw DataError("build_feature_vectors: all 4 scorers required");
    }

    std::vector<std::string> texts;
    texts.reserve(candidates.size());
    for (const auto& c : candidates) texts.push_back(c.content);

    std::vector<SimilarityFeatureVector> vectors(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) vectors[i].unit_id = candidates[i].id;

    for (std::size_t dim = 0; dim < slots.size(); ++dim) {
        const std::vector<double> raw = slots[dim]->score(query, texts);
        if (raw.size() != candidates.size()) {
            throw ScorerUnavailable("feature scorer " + slots[dim]->name() +
                                    " returned wrong score count");
        }
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (!std::isfinite(raw[i])) {
                throw ScorerUnavailable("feature scorer " + slots[dim]->name() +
                                            " returned a non-finite score",
                                        candidates[i].id);
            }
        }
        const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
        const double lo = *lo_it, hi = *hi_it;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            vectors[i].v[dim] = hi > lo ? (raw[i] - lo) / (hi - lo) : 0.0;
        }
    }
    return vectors;
}

namespace {

double euclidean(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

const ContextUnit& unit_by_id(const std::vector<ContextUnit>& candidates, const std::string& id) {
    for (const auto& c : candidates) {
        if (c.id == id) return c;
    }
    throw DataError("unit " + id + " is not among the candidates");
}

// Canonical pair ordering used by every miner and by the exporter:
// query asc, positives before negatives, unit_id asc.
void sort_pairs(std::vector<TrainingPair>& pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const TrainingPair& a, const TrainingPair& b) {
        if (a.query != b.query) return a.query < b.query;
        if (a.label != b.label) return a.label == PairLabel::positive;
        return a.unit_id < b.unit_id;
    });
}

std::vector<TrainingPair> emit_pairs(const std::string& query,
                                     const std::vector<std::string>& positives,
                                     const std::vector<ContextUnit>& candidates,
                                     const std::vector<std::string>& negative_ids,
                                     PairOrigin negative_origin) {
    std::vector<TrainingPair> pairs;
    pairs.reserve(positives.size() + negative_ids.size());
    for (const auto& id : positives) {
        pairs.push_back(TrainingPair{query, id, unit_by_id(candidates, id).content,
                                     PairLabel::positive, PairOrigin::gold});
    }
    for (const auto& id : negative_ids) {
        pairs.push_back(TrainingPair{query, id, unit_by_id(candidates, id).content,
                                     PairLabel::negative, negative_origin});
    }
    sort_pairs(pairs);
    return pairs;
}

std::vector<std::size_t> non_positive_indices(const std::vector<std::string>& positives,
                                              const std::vector<ContextUnit>& candidates) {
    const std::unordered_set<std::string> positive_set(positives.begin(), positives.end());
    for (const auto& id : positives) unit_by_id(candidates, id);  // positives ⊆ candidates
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (positive_set.count(candidates[i].id) == 0) out.push_back(i);
    }
    if (out.empty()) {
        throw NoNegativeCandidates("every candidate is a gold context of this query");
    }
    return out;
}

// Uniform integer in [0, n) from raw 32-bit draws by rejection — identical
// sequences on every platform, unlike std::uniform_int_distribution.
std::uint32_t bounded_draw(std::mt19937& rng, std::uint32_t n) {
    const std::uint32_t limit = std::numeric_limits<std::uint32_t>::max() / n * n;
    std::uint32_t value = rng();
    while (value >= limit) value = rng();
    return value % n;
}

}  // namespace

std::vector<TrainingPair> mine_cluster_negatives(const std::string& query,
                                                 const std::vector<std::string>& positives,
                                                 const std::vector<ContextUnit>& candidates,
                                                 const std::vector<SimilarityFeatureVector>& vectors,
                                                 int k) {
    if (k < 1) throw DataError("mine_cluster_negatives: k must be >= 1");
    if (vectors.size() != candidates.size()) {
        throw DataError("mine_cluster_negatives: vectors misaligned with candidates");
    }
    std::unordered_map<std::string, const SimilarityFeatureVector*> by_id;
    for (const auto& v : vectors) by_id[v.unit_id] = &v;

    const std::vector<std::size_t> pool = non_positive_indices(positives, candidates);

    std::set<std::string> selected;  // ordered -> deterministic dedup output
    for (const auto& positive_id : positives) {
        auto it = by_id.find(positive_id);
        if (it == by_id.end()) {
            throw DataError("no feature vector for positive " + positive_id);
        }
        const auto& pv = it->second->v;

        std::vector<std::pair<double, std::string>> ranked;  // (distance, unit_id)
        ranked.reserve(pool.size());
        for (std::size_t idx : pool) {
            ranked.emplace_back(euclidean(pv, vectors[idx].v), candidates[idx].id);
        }
        std::sort(ranked.begin(), ranked.end());
        for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i) {
            selected.insert(ranked[i].second);
        }
    }

    return emit_pairs(query, positives, candidates,
                      std::vector<std::string>(selected.begin(), selected.end()),
                      PairOrigin::cluster_knn);
}

std::vector<TrainingPair> mine_cluster_negatives(const std::string& query,
                                                 const std::vector<std::string>& positives,
                                                 const std::vector<ContextUnit>& candidates,
                                                 const MiningScorers& scorers, int k) {
    return mine_cluster_negatives(query, positives, candidates,
                                  build_feature_vectors(query, candidates, scorers), k);
}

std::vector<TrainingPair> mine_random_negatives(const std::string& query,
                                                const std::vector<std::string>& positives,
                                                const std::vector<ContextUnit>& candidates,
                                                int count, std::uint64_t seed) {
    if (count < 1) throw DataError("mine_random_negatives: count must be >= 1");
    std::vector<std::size_t> pool = non_positive_indices(positives, candidates);

    // Fisher-Yates over the pool, consuming draws in a fixed order.
    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    for (std::size_t i = pool.size() - 1; i > 0; --i) {
        const std::uint32_t j = bounded_draw(rng, static_cast<std::uint32_t>(i + 1));
        std::swap(pool[i], pool[j]);
    }

    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(count), pool.size());
    std::vector<std::string> ids;
    ids.reserve(take);
    for (std::size_t i = 0; i < take; ++i) ids.push_back(candidates[pool[i]].id);

    return emit_pairs(query, positives, candidates, ids, PairOrigin::random_sample);
}

std::vector<TrainingPair> mine_self_negatives(const std::string& query,
                                              const std::vector<std::string>& positives,
                                              const std::vector<ContextUnit>& candidates,
                                              RelevanceScorer& scorer, int count) {
    if (count < 1) throw DataError("mine_self_negatives: count must be >= 1");
    const std::vector<std::size_t> pool = non_positive_indices(positives, candidates);

    std::vector<ContextUnit> pool_units;
    pool_units.reserve(pool.size());
    for (std::size_t idx : pool) pool_units.push_back(candidates[idx]);

    const std::vector<ScoredContext> ranked = score_contexts(query, pool_units, scorer);
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(count), ranked.size());
    std::vector<std::string> ids;
    ids.reserve(take);
    for (std::size_t i = 0; i < take; ++i) ids.push_back(ranked[i].unit.id);

    return emit_pairs(query, positives, candidates, ids, PairOrigin::self_mined);
}

std::size_t export_training_set(const std::vector<TrainingPair>& pairs,
                                const std::filesystem::path& path) {
    std::vector<TrainingPair> ordered = pairs;
    sort_pairs(ordered);

    std::set<std::pair<std::string, std::string>> seen;
    std::string out;
    for (const auto& pair : ordered) {
        if (!seen.emplace(pair.query, pair.context).second) {
            throw DuplicatePair("duplicate (query, context) pair for unit " + pair.unit_id);
        }
        json line{{"query", pair.query},
                  {"context", pair.context},
                  {"label", to_string(pair.label)},
                  {"origin", to_string(pair.origin)}};
        out += line.dump();
        out += '\n';
    }
    write_file(path, out);
    return ordered.size();
}

}  // namespace finrag
