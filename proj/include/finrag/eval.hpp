#pragma once

#include <map>
#include <string>
#include <vector>

#include "finrag/context_rank.hpp"
#include "finrag/corpus.hpp"
#include "finrag/llm_gateway.hpp"
#include "finrag/primary.hpp"
#include "finrag/reader.hpp"

namespace finrag {

// ---------------------------------------------------------------------------
// Answer processing & matching
// ---------------------------------------------------------------------------

enum class AnswerKind { number, text, insufficient };

struct NormalizedAnswer {
    AnswerKind kind = AnswerKind::text;
    double value = 0.0;  // meaningful only when kind == number
    std::string raw;     // number: original string; text: lowercased trimmed
    std::string rendered() const;  // canonical display form (5-decimal numbers)
};

// Total function. Precedence: a JSON object's "answer" field; else the text
// after the last "the answer is"; else the last numeric-looking token; else
// the trimmed generation itself.
std::string extract_answer(const std::string& generation);

// "90%" -> 0.90, "3/4" -> 0.75, "$1,234.50" -> 1234.5, "(5.2)" -> -5.2;
// anything containing "insufficient_context" short-circuits; non-numbers
// become lowercased text. Idempotent over rendered().
NormalizedAnswer normalize_answer(const std::string& s);

enum class MatchedVia { exact_answer, exact_exe, isclose_exe, none };

std::string to_string(MatchedVia via);

struct Verdict {
    bool correct = false;
    MatchedVia matched_via = MatchedVia::none;
    std::string details;
};

// Exact equality (numbers after 5-decimal rounding, text case-insensitively)
// against the normalized gold answer, then the normalized execution answer;
// then numbers-only relative closeness (|a-b| <= 0.01*max(|a|,|b|)) against
// the execution answer. Insufficient-context predictions are incorrect.
Verdict match_answer(const NormalizedAnswer& pred, const std::string& gold_answer,
                     const std::string& gold_exe);

// 1 iff any of the first n ranked ids is in gold. Throws EmptyGold.
int recall_hit(const std::vector<std::string>& ranked, const std::vector<std::string>& gold,
               std::size_t n);

// 100 x mean of per-query hits; 0 for an empty list.
double recall_percentage(const std::vector<int>& hits);

// ---------------------------------------------------------------------------
// Evaluation drives
// ---------------------------------------------------------------------------

struct EvalConfig {
    RetrievalMethod retrieval = RetrievalMethod::tfidf;
    int pages_n = 8;     // pages kept after the merge (end-to-end)
    int contexts_k = 3;  // 3 module-wise, 5 end-to-end
    PromptMode prompt_mode = PromptMode::dynamic_nshot;
    int shots = 3;
    std::string answer_model_id = "gpt-4";
    std::string decompose_model_id = "gpt-3.5-turbo";
    double temperature = 0.2;
    std::vector<int> page_recall_points{8};
    std::vector<int> context_recall_points{3, 5};
    bool augment_questions = true;  // end-to-end only
    int threads = 1;                // never part of the config snapshot
};

struct QuestionResult {
    std::string id;
    std::string question;           // as evaluated (post-augmentation for e2e)
    std::vector<std::string> sub_queries;
    std::vector<std::string> retrieved_pages;     // rank order
    std::vector<std::string> retrieved_contexts;  // rank order (full scored list)
    std::string generation;
    std::string extracted;
    std::string prediction;  // normalized rendering
    Verdict verdict;
    bool skipped = false;      // excluded from accuracy (e.g. gold page absent)
    std::string failure;       // stage error; question counted incorrect
    bool failure_is_backend = false;  // failure was a backend error, not a data one
    std::map<int, int> page_hits;     // N -> 0/1, only when gold resolvable
    std::map<int, int> context_hits;  // N -> 0/1, only when gold ids known
    std::vector<std::string> notes;
};

struct RecallCell {
    std::string module;  // "page" | "context"
    int n = 0;
    double percentage = 0.0;
    int evaluated = 0;  // questions contributing to the mean
};

struct EvalReport {
    std::vector<QuestionResult> results;  // dataset order
    int total = 0;    // questions counted toward accuracy
    int correct = 0;
    int skipped = 0;
    double accuracy = 0.0;  // 100 * correct / total
    std::vector<RecallCell> recall;
    std::map<std::string, std::string> config_snapshot;  // deterministic
    bool no_data = false;

    std::string to_json() const;          // byte-deterministic
    std::string to_table() const;         // human-readable summary
    std::string predictions_jsonl() const;
};

// Gold-page-only candidates, top contexts_k, answer, verdict. Questions whose
// gold page is missing from the store are skipped and counted in the report.
EvalReport run_modular_eval(const std::vector<QARecord>& dataset, const ReportStore& store,
                            RelevanceScorer& scorer, ChatClient& llm,
                            const ExemplarStore& exemplars, const TextEmbedder& embedder,
                            const EvalConfig& config);

// Full pipeline: decompose -> entities -> reports -> top pages_n pages ->
// pooled units -> top contexts_k contexts -> answer. Stage failures are
// recorded per question and never abort the run.
EvalReport run_e2e_eval(const std::vector<QARecord>& dataset, const ReportStore& store,
                        RelevanceScorer& scorer, ChatClient& llm,
                        const ExemplarStore& exemplars, const TextEmbedder& embedder,
                        const EvalConfig& config);

}  // namespace finrag
