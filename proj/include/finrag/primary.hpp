#pragma once

#include <string>
#include <vector>

#include "finrag/corpus.hpp"
#include "finrag/llm_gateway.hpp"
#include "finrag/sparse_index.hpp"

namespace finrag {

struct EntityRefs {
    std::vector<std::string> companies;  // matched gazetteer aliases, surface form
    std::vector<int> years;              // 4-digit, within [1990, 2030]
};

struct DecomposedQuery {
    std::string original;
    std::vector<std::string> sub_queries;  // never empty; falls back to {original}
    EntityRefs entities;
    bool fallback = false;  // completion had no numbered lines
};

// 5-shot decomposition through the LLM; a completion with no numbered lines
// degrades to {original} with the fallback flag set rather than failing.
DecomposedQuery decompose_query(const std::string& question, ChatClient& llm,
                                const std::string& model_id = "gpt-3.5-turbo",
                                double temperature = 0.2);

// Years by 4-digit scan, companies by case-insensitive longest-match against
// the store's gazetteer (tickers and display names both count as aliases).
EntityRefs extract_entities(const std::string& question, const ReportStore& store);

// Reports matching any company AND any year; a side that is empty does not
// filter. Both sides empty is AmbiguousQuery; nothing left is NoSuchReport.
std::vector<const Report*> select_reports(const EntityRefs& entities, const ReportStore& store);

struct ScoredPage {
    std::string ticker;
    int fiscal_year = 0;
    int page_no = 0;
    double score = 0.0;
};

enum class RetrievalMethod { tfidf, bm25 };

RetrievalMethod retrieval_method_from_name(const std::string& name);  // "tfidf" | "bm25"

// One document per page: page text plus every linearized table row. Doc ids
// are zero-padded page numbers so lexicographic tie-breaks follow page order.
SparseIndex build_page_index(const Report& report);

std::vector<ScoredPage> retrieve_pages(const std::string& sub_query, const Report& report,
                                       const SparseIndex& page_index, RetrievalMethod method,
                                       std::size_t n);

std::vector<ScoredPage> retrieve_pages(const std::string& sub_query, const Report& report,
                                       RetrievalMethod method, std::size_t n);

// Union of per-sub-query lists, deduplicated by (ticker, year, page) keeping
// the max score, fully re-sorted. Deliberately untruncated: no page any
// sub-query ranked is dropped here.
std::vector<ScoredPage> merge_scored_pages(const std::vector<std::vector<ScoredPage>>& lists);

}  // namespace finrag
