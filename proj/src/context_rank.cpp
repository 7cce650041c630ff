#include "finrag/context_rank.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "finrag/errors.hpp"
#include "finrag/sparse_index.hpp"
#include "finrag/util.hpp"

namespace finrag {

using nlohmann::json;

std::vector<ScoredContext> score_contexts(const std::string& query,
                                          const std::vector<ContextUnit>& units,
                                          RelevanceScorer& scorer) {
    if (units.empty()) throw DataError("score_contexts: no candidate units");

    std::vector<std::string> texts;
    texts.reserve(units.size());
    for (const auto& unit : units) texts.push_back(unit.content);

    std::vector<double> scores;
    try {
        scores = scorer.score(query, texts);
    } catch (const ScorerUnavailable& e) {
        // Translate the scorer's positional partial progress into unit ids.
        std::vector<std::pair<std::string, double>> partial;
        partial.reserve(e.partial.size());
        for (const auto& [key, value] : e.partial) {
            auto pos = parse_long(key);
            if (pos && *pos >= 0 && static_cast<std::size_t>(*pos) < units.size()) {
                partial.emplace_back(units[static_cast<std::size_t>(*pos)].id, value);
            }
        }
        const std::size_t next = partial.size();
        const std::string failing =
            !e.unit_id.empty() ? e.unit_id : (next < units.size() ? units[next].id : "");
        throw ScorerUnavailable(e.what(), failing, std::move(partial));
    }

    if (scores.size() != units.size()) {
        throw ScorerUnavailable("scorer " + scorer.name() + " returned " +
                                std::to_string(scores.size()) + " scores for " +
                                std::to_string(units.size()) + " units");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            std::vector<std::pair<std::string, double>> partial;
            for (std::size_t j = 0; j < i; ++j) partial.emplace_back(units[j].id, scores[j]);
            throw ScorerUnavailable(
                "scorer " + scorer.name() + " returned a non-finite score for " + units[i].id,
                units[i].id, std::move(partial));
        }
    }

    std::vector<ScoredContext> out;
    out.reserve(units.size());
    const std::string scorer_name = scorer.name();
    for (std::size_t i = 0; i < units.size(); ++i) {
        out.push_back(ScoredContext{units[i], scores[i], scorer_name});
    }
    std::sort(out.begin(), out.end(), [](const ScoredContext& a, const ScoredContext& b) {
        if (a.s != b.s) return a.s > b.s;
        return a.unit.id < b.unit.id;
    });
    return out;
}

std::vector<ContextUnit> select_top_k(const std::vector<ScoredContext>& scored, std::size_t k) {
    if (k < 1) throw DataError("select_top_k: k must be >= 1");
    std::vector<ContextUnit> out;
    out.reserve(std::min(k, scored.size()));
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].unit);
    return out;
}

// ---------------------------------------------------------------------------
// Lexical scorers
// ---------------------------------------------------------------------------

namespace {

// Zero-padded positional doc ids keep the micro-index's lexicographic
// tie-break identical to candidate order.
std::string position_id(std::size_t pos) {
    std::string id = std::to_string(pos);
    return std::string(8 - std::min<std::size_t>(8, id.size()), '0') + id;
}

std::vector<std::pair<std::string, std::string>> micro_docs(
    const std::vector<std::string>& contexts) {
    std::vector<std::pair<std::string, std::string>> docs;
    docs.reserve(contexts.size());
    for (std::size_t i = 0; i < contexts.size(); ++i) docs.emplace_back(position_id(i), contexts[i]);
    return docs;
}

std::vector<double> scores_by_position(const std::vector<ScoredDoc>& ranked, std::size_t count) {
    std::vector<double> out(count, 0.0);
    for (const auto& doc : ranked) {
        auto pos = parse_long(doc.doc_id);
        if (pos && *pos >= 0 && static_cast<std::size_t>(*pos) < count) {
            out[static_cast<std::size_t>(*pos)] = doc.score;
        }
    }
    return out;
}

}  // namespace

std::vector<double> LexicalTfidfScorer::score(const std::string& query,
                                              const std::vector<std::string>& contexts) {
    const SparseIndex index = build_index(micro_docs(contexts));
    return scores_by_position(score_tfidf(index, query), contexts.size());
}

std::vector<double> LexicalBm25Scorer::score(const std::string& query,
                                             const std::vector<std::string>& contexts) {
    const SparseIndex index = build_index(micro_docs(contexts));
    return scores_by_position(score_bm25(index, query, k1_, b_), contexts.size());
}

// ---------------------------------------------------------------------------
// Embedding cosine scorer
// ---------------------------------------------------------------------------

EmbeddingCosineScorer::EmbeddingCosineScorer(std::string scorer_name, EmbedFn embed)
    : name_(std::move(scorer_name)), embed_(std::move(embed)) {}

std::shared_ptr<EmbeddingCosineScorer> EmbeddingCosineScorer::hashing(std::size_t dim) {
    return std::make_shared<EmbeddingCosineScorer>(
        "embedding_hash", [dim](const std::vector<std::string>& texts) {
            std::vector<std::vector<double>> vectors;
            vectors.reserve(texts.size());
            for (const auto& text : texts) vectors.push_back(hash_embed(text, dim));
            return vectors;
        });
}

std::shared_ptr<EmbeddingCosineScorer> EmbeddingCosineScorer::gateway(ChatClient& client,
                                                                      std::string model_id,
                                                                      std::string scorer_name) {
    return std::make_shared<EmbeddingCosineScorer>(
        std::move(scorer_name),
        [&client, model_id = std::move(model_id)](const std::vector<std::string>& texts) {
            return client.embed(texts, model_id);
        });
}

std::vector<double> EmbeddingCosineScorer::score(const std::string& query,
                                                 const std::vector<std::string>& contexts) {
    std::vector<std::string> batch;
    batch.reserve(contexts.size() + 1);
    batch.push_back(query);
    for (const auto& c : contexts) batch.push_back(c);

    std::vector<std::vector<double>> vectors;
    try {
        vectors = embed_(batch);
    } catch (const BackendError& e) {
        throw ScorerUnavailable(std::string("embedding backend failed: ") + e.what());
    }
    if (vectors.size() != batch.size()) {
        throw ScorerUnavailable("embedding backend returned wrong vector count");
    }

    std::vector<double> scores;
    scores.reserve(contexts.size());
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        const double value = cosine_similarity(vectors[0], vectors[i]);
        scores.push_back(std::clamp(value, -1.0, 1.0));
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Remote cross-encoder scorer
// ---------------------------------------------------------------------------

RemoteCrossEncoderScorer::RemoteCrossEncoderScorer(Config config,
                                                   std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(transport != nullptr ? std::move(transport) : make_default_transport()) {
    if (config_.batch_size == 0) config_.batch_size = 1;
}

std::vector<double> RemoteCrossEncoderScorer::score(const std::string& query,
                                                    const std::vector<std::string>& contexts) {
    std::vector<double> scores;
    scores.reserve(contexts.size());

    auto fail = [&](const std::string& why) -> ScorerUnavailable {
        std::vector<std::pair<std::string, double>> partial;
        partial.reserve(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            partial.emplace_back(std::to_string(i), scores[i]);
        }
        return ScorerUnavailable("remote cross-encoder: " + why, "", std::move(partial));
    };

    for (std::size_t start = 0; start < contexts.size(); start += config_.batch_size) {
        const std::size_t end = std::min(contexts.size(), start + config_.batch_size);
        json body{{"query", query},
                  {"contexts", std::vector<std::string>(contexts.begin() + start,
                                                        contexts.begin() + end)}};
        HttpResult result = transport_->post(config_.endpoint_url, config_.auth_token, body.dump());
        if (result.status == 0) throw fail("no response from " + config_.endpoint_url);
        if (result.status != 200) throw fail("HTTP " + std::to_string(result.status));

        json parsed;
        try {
            parsed = json::parse(result.body);
        } catch (const json::exception& e) {
            throw fail(std::string("bad JSON: ") + e.what());
        }
        if (!parsed.contains("scores") || !parsed["scores"].is_array() ||
            parsed["scores"].size() != end - start) {
            throw fail("response missing a scores array of batch length");
        }
        for (const auto& value : parsed["scores"]) {
            if (!value.is_number()) throw fail("non-numeric score in response");
            scores.push_back(value.get<double>());
        }
    }
    return scores;
}

}  // namespace finrag
