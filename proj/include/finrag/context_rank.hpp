#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "finrag/corpus.hpp"
#include "finrag/llm_gateway.hpp"

namespace finrag {

// One relevance score per candidate, higher = more relevant, all finite.
// Batch-shaped so lexical scorers can build their per-query micro-index over
// the candidate pool in a single pass; each context is still scored exactly
// once per call.
class RelevanceScorer {
public:
    virtual ~RelevanceScorer() = default;
    virtual std::string name() const = 0;
    virtual std::vector<double> score(const std::string& query,
                                      const std::vector<std::string>& contexts) = 0;
};

struct ScoredContext {
    ContextUnit unit;
    double s = 0.0;
    std::string scorer_name;
};

// Scores every unit and returns them sorted by (s desc, unit id asc). A
// non-finite score, or a mid-batch remote failure, raises ScorerUnavailable
// naming the offending unit and carrying the scores completed so far.
std::vector<ScoredContext> score_contexts(const std::string& query,
                                          const std::vector<ContextUnit>& units,
                                          RelevanceScorer& scorer);

// First min(k, len) units of an already-sorted scored list. k must be >= 1.
std::vector<ContextUnit> select_top_k(const std::vector<ScoredContext>& scored, std::size_t k);

// ---------------------------------------------------------------------------
// Scorer implementations
// ---------------------------------------------------------------------------

// TF-IDF cosine over a micro-index built from the candidate pool itself.
class LexicalTfidfScorer final : public RelevanceScorer {
public:
    std::string name() const override { return "lexical_tfidf"; }
    std::vector<double> score(const std::string& query,
                              const std::vector<std::string>& contexts) override;
};

class LexicalBm25Scorer final : public RelevanceScorer {
public:
    explicit LexicalBm25Scorer(double k1 = 1.5, double b = 0.75) : k1_(k1), b_(b) {}
    std::string name() const override { return "lexical_bm25"; }
    std::vector<double> score(const std::string& query,
                              const std::vector<std::string>& contexts) override;

private:
    double k1_;
    double b_;
};

// Cosine between embeddings of the query and each candidate. The embedding
// source is injected; `hashing` wires in the offline hash embedder and
// `gateway` wires in a ChatClient's embedding endpoint. Scores are clamped
// to [-1, 1] to absorb floating-point drift.
class EmbeddingCosineScorer final : public RelevanceScorer {
public:
    using EmbedFn =
        std::function<std::vector<std::vector<double>>(const std::vector<std::string>&)>;

    EmbeddingCosineScorer(std::string scorer_name, EmbedFn embed);

    static std::shared_ptr<EmbeddingCosineScorer> hashing(std::size_t dim = 64);
    static std::shared_ptr<EmbeddingCosineScorer> gateway(ChatClient& client,
                                                          std::string model_id,
                                                          std::string scorer_name);

    std::string name() const override { return name_; }
    std::vector<double> score(const std::string& query,
                              const std::vector<std::string>& contexts) override;

private:
    std::string name_;
    EmbedFn embed_;
};

// Externally served fine-tuned classifier. Wire contract:
//   POST <endpoint> {"query": Q, "contexts": [C...]} -> {"scores": [s...]}
// Candidates are sent in batches; a failure partway through raises
// ScorerUnavailable carrying the scores of the completed batches.
class RemoteCrossEncoderScorer final : public RelevanceScorer {
public:
    struct Config {
        std::string endpoint_url;
        std::string auth_token;
        std::size_t batch_size = 16;
    };

    explicit RemoteCrossEncoderScorer(Config config,
                                      std::shared_ptr<HttpTransport> transport = nullptr);

    std::string name() const override { return "remote_cross_encoder"; }
    std::vector<double> score(const std::string& query,
                              const std::vector<std::string>& contexts) override;

private:
    Config config_;
    std::shared_ptr<HttpTransport> transport_;
};

}  // namespace finrag
