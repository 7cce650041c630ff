#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace finrag {

using TokenStream = std::vector<std::string>;

// Lowercases and splits on every non-alphanumeric character; digits are kept,
// '%' and '$' fall away with the split. "23.6%" -> {"23", "6"}.
TokenStream tokenize(std::string_view text);

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
};

// Canonical ordering for ranked lists: score descending, doc_id ascending.
// Every scorer in this library returns lists sorted this way so ties are
// reproducible across runs and thread counts.
void sort_scored(std::vector<ScoredDoc>& docs);

struct SparseIndex {
    std::vector<std::string> doc_ids;
    std::vector<std::uint32_t> doc_lengths;
    // term -> (doc ordinal, term frequency), ordinals ascending
    std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings;
    std::unordered_map<std::string, std::uint32_t> df;
    double avg_doc_len = 0.0;

    std::size_t size() const { return doc_ids.size(); }
};

// Throws DuplicateDocId. Insertion order never influences downstream scores.
SparseIndex build_index(const std::vector<std::pair<std::string, std::string>>& docs);

// Cosine similarity of L2-normalized TF-IDF vectors, tf = raw count,
// idf = ln((1+N)/(1+df)) + 1. Query terms absent from the vocabulary are
// dropped before normalization. Returns every document, sorted.
std::vector<ScoredDoc> score_tfidf(const SparseIndex& index, const std::string& query);

// Okapi BM25 with idf = ln(1 + (N - df + 0.5)/(df + 0.5)). Repeated query
// terms contribute once per occurrence. Returns every document, sorted.
std::vector<ScoredDoc> score_bm25(const SparseIndex& index, const std::string& query,
                                  double k1 = 1.5, double b = 0.75);

// First min(n, size) entries under the canonical ordering.
std::vector<ScoredDoc> top_n(std::vector<ScoredDoc> scored, std::size_t n);

// Stable digest of a document collection, used to key persisted indexes.
std::string corpus_digest(const std::vector<std::pair<std::string, std::string>>& docs);

// Versioned JSON persistence. Not required for correctness; ingest-once
// workflows use it to skip rebuilding page indexes.
void save_index(const SparseIndex& index, const std::filesystem::path& path,
                const std::string& digest);
SparseIndex load_index(const std::filesystem::path& path, std::string* digest_out = nullptr);

}  // namespace finrag
