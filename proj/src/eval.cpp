#include "finrag/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "json.hpp"

#include "finrag/errors.hpp"
#include "finrag/util.hpp"

namespace finrag {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Answer processing
// ---------------------------------------------------------------------------

std::string NormalizedAnswer::rendered() const {
    switch (kind) {
        case AnswerKind::insufficient: return "insufficient_context";
        case AnswerKind::number: return format_double(round_places(value, 5));
        case AnswerKind::text: return raw;
    }
    return raw;
}

namespace {

std::optional<std::string> json_answer_field(const std::string& text) {
    json parsed;
    try {
        parsed = json::parse(text);
    } catch (const json::exception&) {
        return std::nullopt;
    }
    if (!parsed.is_object() || !parsed.contains("answer")) return std::nullopt;
    const json& answer = parsed["answer"];
    if (answer.is_string()) return answer.get<std::string>();
    if (answer.is_number_integer()) return std::to_string(answer.get<long long>());
    if (answer.is_number()) return format_double(answer.get<double>());
    if (answer.is_boolean()) return answer.get<bool>() ? std::string("yes") : std::string("no");
    return std::nullopt;
}

// The JSON rule tolerates generations that wrap the object in code fences or
// lead-in prose: try the trimmed text, then the outermost brace span.
std::optional<std::string> extract_json_answer(const std::string& generation) {
    const std::string trimmed = trim(generation);
    if (auto direct = json_answer_field(trimmed)) return direct;
    const std::size_t open = trimmed.find('{');
    const std::size_t close = trimmed.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close <= open) {
        return std::nullopt;
    }
    return json_answer_field(trimmed.substr(open, close - open + 1));
}

std::optional<std::string> extract_marker_answer(const std::string& generation) {
    static constexpr std::string_view kMarker = "the answer is";
    const std::string lower = lower_ascii(generation);
    const std::size_t pos = lower.rfind(kMarker);
    if (pos == std::string::npos) return std::nullopt;

    std::string tail = generation.substr(pos + kMarker.size());
    const std::size_t newline = tail.find('\n');
    if (newline != std::string::npos) tail = tail.substr(0, newline);
    std::string answer = trim(tail);
    if (!answer.empty() && answer.front() == ':') answer = trim(answer.substr(1));
    if (!answer.empty() && (answer.back() == '.')) answer = trim(answer.substr(0, answer.size() - 1));
    if (answer.empty()) return std::nullopt;
    return answer;
}

}  // namespace

std::string extract_answer(const std::string& generation) {
    if (auto from_json = extract_json_answer(generation)) return *from_json;
    if (auto from_marker = extract_marker_answer(generation)) return *from_marker;
    if (auto token = last_numeric_token(generation)) return *token;
    return trim(generation);
}

NormalizedAnswer normalize_answer(const std::string& s) {
    NormalizedAnswer out;
    if (contains_ci(s, "insufficient_context")) {
        out.kind = AnswerKind::insufficient;
        out.raw = "insufficient_context";
        return out;
    }
    if (const auto number = parse_financial_number(s)) {
        out.kind = AnswerKind::number;
        out.value = *number;
        out.raw = trim(s);
        return out;
    }
    out.kind = AnswerKind::text;
    out.raw = lower_ascii(trim(s));
    return out;
}

std::string to_string(MatchedVia via) {
    switch (via) {
        case MatchedVia::exact_answer: return "exact_answer";
        case MatchedVia::exact_exe: return "exact_exe";
        case MatchedVia::isclose_exe: return "isclose_exe";
        case MatchedVia::none: return "none";
    }
    return "none";
}

namespace {

bool exact_match(const NormalizedAnswer& pred, const NormalizedAnswer& gold) {
    if (pred.kind == AnswerKind::number && gold.kind == AnswerKind::number) {
        return round_places(pred.value, 5) == round_places(gold.value, 5);
    }
    if (pred.kind == AnswerKind::text && gold.kind == AnswerKind::text) {
        return pred.raw == gold.raw;  // both already lowercased
    }
    return false;
}

}  // namespace

Verdict match_answer(const NormalizedAnswer& pred, const std::string& gold_answer,
                     const std::string& gold_exe) {
    Verdict verdict;
    const NormalizedAnswer answer_gold = normalize_answer(gold_answer);
    const NormalizedAnswer exe_gold = normalize_answer(gold_exe);
    const std::string shown = "pred=" + pred.rendered() + " gold_answer=" +
                              answer_gold.rendered() + " gold_exe=" + exe_gold.rendered();

    if (pred.kind == AnswerKind::insufficient) {
        verdict.details = "insufficient_context prediction; " + shown;
        return verdict;
    }
    if (exact_match(pred, answer_gold)) {
        verdict.correct = true;
        verdict.matched_via = MatchedVia::exact_answer;
    } else if (exact_match(pred, exe_gold)) {
        verdict.correct = true;
        verdict.matched_via = MatchedVia::exact_exe;
    } else if (pred.kind == AnswerKind::number && exe_gold.kind == AnswerKind::number &&
               rel_close(pred.value, exe_gold.value, 0.01)) {
        verdict.correct = true;
        verdict.matched_via = MatchedVia::isclose_exe;
    }
    verdict.details = shown;
    return verdict;
}

int recall_hit(const std::vector<std::string>& ranked, const std::vector<std::string>& gold,
               std::size_t n) {
    if (gold.empty()) throw EmptyGold("recall against an empty gold set");
    const std::unordered_set<std::string> gold_set(gold.begin(), gold.end());
    for (std::size_t i = 0; i < ranked.size() && i < n; ++i) {
        if (gold_set.count(ranked[i]) != 0) return 1;
    }
    return 0;
}

double recall_percentage(const std::vector<int>& hits) {
    if (hits.empty()) return 0.0;
    long sum = 0;
    for (int hit : hits) sum += hit;
    return 100.0 * static_cast<double>(sum) / static_cast<double>(hits.size());
}

// ---------------------------------------------------------------------------
// Shared harness machinery
// ---------------------------------------------------------------------------

namespace {

void run_indexed(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, threads);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& worker : pool) worker.join();
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i != 0) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::map<std::string, std::string> snapshot_config(const EvalConfig& config,
                                                   const std::string& mode,
                                                   const std::string& scorer_name,
                                                   const std::string& embedder_model) {
    // Deliberately excludes the thread count: reports must be byte-identical
    // however the work was parallelized.
    return {
        {"mode", mode},
        {"retrieval", config.retrieval == RetrievalMethod::tfidf ? "tfidf" : "bm25"},
        {"scorer", scorer_name},
        {"embedder_model", embedder_model},
        {"pages_n", std::to_string(config.pages_n)},
        {"contexts_k", std::to_string(config.contexts_k)},
        {"prompt_mode", to_string(config.prompt_mode)},
        {"shots", std::to_string(config.shots)},
        {"answer_model", config.answer_model_id},
        {"decompose_model", config.decompose_model_id},
        {"temperature", format_double(config.temperature)},
        {"page_recall_points", join_ints(config.page_recall_points)},
        {"context_recall_points", join_ints(config.context_recall_points)},
        {"augment_questions", config.augment_questions ? "true" : "false"},
    };
}

void score_and_answer(QuestionResult& result, const QARecord& record,
                      const std::vector<ContextUnit>& candidates, RelevanceScorer& scorer,
                      ChatClient& llm, const ExemplarStore& exemplars,
                      const TextEmbedder& embedder, const EvalConfig& config) {
    const std::vector<ScoredContext> scored =
        score_contexts(result.question, candidates, scorer);
    result.retrieved_contexts.reserve(scored.size());
    for (const auto& entry : scored) result.retrieved_contexts.push_back(entry.unit.id);

    if (!record.gold_context_ids.empty()) {
        for (int n : config.context_recall_points) {
            result.context_hits[n] = recall_hit(result.retrieved_contexts,
                                                record.gold_context_ids,
                                                static_cast<std::size_t>(n));
        }
    } else {
        result.notes.push_back("no gold context ids; context recall skipped");
    }

    const std::vector<ContextUnit> top =
        select_top_k(scored, static_cast<std::size_t>(config.contexts_k));

    AnswerConfig answer_config;
    answer_config.mode = config.prompt_mode;
    answer_config.n = config.shots;
    answer_config.model_id = config.answer_model_id;
    answer_config.temperature = config.temperature;
    result.generation = answer(result.question, top, llm, exemplars, embedder, answer_config);
    result.extracted = extract_answer(result.generation);
    const NormalizedAnswer normalized = normalize_answer(result.extracted);
    result.prediction = normalized.rendered();
    result.verdict = match_answer(normalized, record.answer, record.exe_answer);
}

void finalize(EvalReport& report, const EvalConfig& config) {
    report.total = 0;
    report.correct = 0;
    report.skipped = 0;
    for (const auto& result : report.results) {
        if (result.skipped) {
            ++report.skipped;
            continue;
        }
        ++report.total;
        if (result.verdict.correct) ++report.correct;
    }
    report.accuracy = report.total > 0
                          ? 100.0 * static_cast<double>(report.correct) /
                                static_cast<double>(report.total)
                          : 0.0;
    report.no_data = report.results.empty();

    report.recall.clear();
    auto add_cells = [&](const std::string& module, const std::vector<int>& points,
                         std::map<int, int> QuestionResult::* hits) {
        for (int n : points) {
            std::vector<int> collected;
            for (const auto& result : report.results) {
                const auto& map = result.*hits;
                if (auto it = map.find(n); it != map.end()) collected.push_back(it->second);
            }
            if (collected.empty()) continue;
            report.recall.push_back(RecallCell{module, n, recall_percentage(collected),
                                               static_cast<int>(collected.size())});
        }
    };
    add_cells("page", config.page_recall_points, &QuestionResult::page_hits);
    add_cells("context", config.context_recall_points, &QuestionResult::context_hits);
}

const Page* find_page(const Report& report, int page_no) {
    for (const auto& page : report.pages) {
        if (page.page_no == page_no) return &page;
    }
    return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Module-wise evaluation
// ---------------------------------------------------------------------------

EvalReport run_modular_eval(const std::vector<QARecord>& dataset, const ReportStore& store,
                            RelevanceScorer& scorer, ChatClient& llm,
                            const ExemplarStore& exemplars, const TextEmbedder& embedder,
                            const EvalConfig& config) {
    EvalReport report;
    report.results.resize(dataset.size());
    report.config_snapshot = snapshot_config(config, "modular", scorer.name(), embedder.model_id);

    run_indexed(dataset.size(), config.threads, [&](std::size_t i) {
        const QARecord& record = dataset[i];
        QuestionResult& result = report.results[i];
        result.id = record.id;
        result.question = record.question;

        const GoldPageRef& gold = record.gold_page;
        const Report* gold_report =
            gold.resolved ? store.find(gold.ticker, gold.fiscal_year) : nullptr;
        const Page* gold_page =
            gold_report != nullptr ? find_page(*gold_report, gold.page_no) : nullptr;
        if (gold_page == nullptr) {
            result.skipped = true;
            result.failure = "gold page not in store: " +
                             (gold.resolved ? page_id(gold.ticker, gold.fiscal_year, gold.page_no)
                                            : std::string("unresolved id"));
            return;
        }

        try {
            const SourceRef source{gold.ticker, gold.fiscal_year, gold.page_no};
            score_and_answer(result, record, extract_context_units(*gold_page, source), scorer,
                             llm, exemplars, embedder, config);
        } catch (const BackendError& e) {
            result.failure = e.what();
            result.failure_is_backend = true;
        } catch (const Error& e) {
            result.failure = e.what();
        }
    });

    finalize(report, config);
    return report;
}

// ---------------------------------------------------------------------------
// End-to-end evaluation
// ---------------------------------------------------------------------------

namespace {

class PageIndexCache {
public:
    const SparseIndex& for_report(const Report& report) {
        std::lock_guard lock(mutex_);
        auto it = indexes_.find(&report);
        if (it == indexes_.end()) {
            it = indexes_.emplace(&report, build_page_index(report)).first;
        }
        return it->second;
    }

private:
    std::mutex mutex_;
    std::map<const Report*, SparseIndex> indexes_;
};

}  // namespace

EvalReport run_e2e_eval(const std::vector<QARecord>& dataset, const ReportStore& store,
                        RelevanceScorer& scorer, ChatClient& llm,
                        const ExemplarStore& exemplars, const TextEmbedder& embedder,
                        const EvalConfig& config) {
    EvalReport report;
    report.results.resize(dataset.size());
    report.config_snapshot = snapshot_config(config, "e2e", scorer.name(), embedder.model_id);

    PageIndexCache index_cache;

    run_indexed(dataset.size(), config.threads, [&](std::size_t i) {
        const QARecord& record = dataset[i];
        QuestionResult& result = report.results[i];
        result.id = record.id;
        result.question = record.question;

        try {
            if (config.augment_questions && record.gold_page.resolved) {
                result.question =
                    augment_question(record.question, record.gold_page.ticker,
                                     record.gold_page.fiscal_year, store.gazetteer());
            }

            const DecomposedQuery decomposed =
                decompose_query(result.question, llm, config.decompose_model_id,
                                config.temperature);
            result.sub_queries = decomposed.sub_queries;
            if (decomposed.fallback) {
                result.notes.push_back("decomposition fallback: no numbered lines in completion");
            }

            const EntityRefs whole_question = extract_entities(result.question, store);

            std::vector<std::vector<ScoredPage>> lists;
            for (const std::string& sub_query : decomposed.sub_queries) {
                EntityRefs entities = extract_entities(sub_query, store);
                if (entities.companies.empty() && entities.years.empty()) {
                    entities = whole_question;
                }
                std::vector<const Report*> reports;
                try {
                    reports = select_reports(entities, store);
                } catch (const DataError& e) {
                    result.notes.push_back("sub-query '" + sub_query + "': " + e.what());
                    continue;
                }
                for (const Report* selected : reports) {
                    lists.push_back(retrieve_pages(sub_query, *selected,
                                                   index_cache.for_report(*selected),
                                                   config.retrieval,
                                                   static_cast<std::size_t>(config.pages_n)));
                }
            }
            if (lists.empty()) {
                throw NoSuchReport("no report matched any sub-query");
            }

            const std::vector<ScoredPage> merged = merge_scored_pages(lists);
            result.retrieved_pages.reserve(merged.size());
            for (const auto& page : merged) {
                result.retrieved_pages.push_back(
                    page_id(page.ticker, page.fiscal_year, page.page_no));
            }
            if (record.gold_page.resolved) {
                const std::vector<std::string> gold{page_id(record.gold_page.ticker,
                                                            record.gold_page.fiscal_year,
                                                            record.gold_page.page_no)};
                for (int n : config.page_recall_points) {
                    result.page_hits[n] = recall_hit(result.retrieved_pages, gold,
                                                     static_cast<std::size_t>(n));
                }
            } else {
                result.notes.push_back("gold page id unresolved; page recall skipped");
            }

            std::vector<ContextUnit> pool;
            for (std::size_t p = 0;
                 p < merged.size() && p < static_cast<std::size_t>(config.pages_n); ++p) {
                const ScoredPage& scored_page = merged[p];
                const Report* owner = store.find(scored_page.ticker, scored_page.fiscal_year);
                const Page* page =
                    owner != nullptr ? find_page(*owner, scored_page.page_no) : nullptr;
                if (page == nullptr) continue;  // cannot happen for pages we indexed
                const SourceRef source{scored_page.ticker, scored_page.fiscal_year,
                                       scored_page.page_no};
                for (auto& unit : extract_context_units(*page, source)) {
                    pool.push_back(std::move(unit));
                }
            }
            if (pool.empty()) throw EmptyPage("no context units on any retrieved page");

            score_and_answer(result, record, pool, scorer, llm, exemplars, embedder, config);
        } catch (const BackendError& e) {
            result.failure = e.what();
            result.failure_is_backend = true;
        } catch (const Error& e) {
            result.failure = e.what();
        }
    });

    finalize(report, config);
    return report;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

namespace {

json result_to_json(const QuestionResult& result) {
    json hits_page = json::object();
    for (const auto& [n, hit] : result.page_hits) hits_page[std::to_string(n)] = hit;
    json hits_context = json::object();
    for (const auto& [n, hit] : result.context_hits) hits_context[std::to_string(n)] = hit;
    return json{{"id", result.id},
                {"question", result.question},
                {"sub_queries", result.sub_queries},
                {"retrieved_pages", result.retrieved_pages},
                {"retrieved_contexts", result.retrieved_contexts},
                {"generation", result.generation},
                {"extracted", result.extracted},
                {"prediction", result.prediction},
                {"correct", result.verdict.correct},
                {"matched_via", to_string(result.verdict.matched_via)},
                {"details", result.verdict.details},
                {"skipped", result.skipped},
                {"failure", result.failure},
                {"notes", result.notes},
                {"page_hits", hits_page},
                {"context_hits", hits_context}};
}

}  // namespace

std::string EvalReport::to_json() const {
    json recall_cells = json::array();
    for (const auto& cell : recall) {
        recall_cells.push_back(json{{"module", cell.module},
                                    {"n", cell.n},
                                    {"percentage", cell.percentage},
                                    {"evaluated", cell.evaluated}});
    }
    json results_json = json::array();
    for (const auto& result : results) results_json.push_back(result_to_json(result));
    const json config_json(config_snapshot);
    const json report{{"accuracy", accuracy}, {"config", config_json},
                      {"correct", correct},  {"no_data", no_data},
                      {"recall", recall_cells}, {"results", results_json},
                      {"skipped", skipped},  {"total", total}};
    return report.dump(2) + "\n";
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    out << "questions: " << results.size() << "  evaluated: " << total
        << "  skipped: " << skipped << "\n";
    out << "accuracy: " << accuracy << " (" << correct << "/" << total << ")\n";
    for (const auto& cell : recall) {
        out << cell.module << " recall@" << cell.n << ": " << cell.percentage << " ("
            << cell.evaluated << " questions)\n";
    }
    out << "\n";
    out << std::left << std::setw(28) << "id" << std::setw(10) << "verdict" << std::setw(14)
        << "via" << "prediction\n";
    for (const auto& result : results) {
        const std::string verdict =
            result.skipped ? "skipped" : (result.verdict.correct ? "correct" : "incorrect");
        out << std::left << std::setw(28) << result.id << std::setw(10) << verdict
            << std::setw(14) << to_string(result.verdict.matched_via) << result.prediction
            << "\n";
    }
    return out.str();
}

std::string EvalReport::predictions_jsonl() const {
    std::string out;
    for (const auto& result : results) {
        json line{{"id", result.id},
                  {"prediction", result.prediction},
                  {"correct", result.verdict.correct},
                  {"matched_via", to_string(result.verdict.matched_via)},
                  {"skipped", result.skipped}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

}  // namespace finrag
