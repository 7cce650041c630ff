#include "finrag/primary.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "finrag/errors.hpp"
#include "finrag/prompts.hpp"
#include "finrag/util.hpp"

namespace finrag {

DecomposedQuery decompose_query(const std::string& question, ChatClient& llm,
                                const std::string& model_id, double temperature) {
    std::string prompt;
    for (const auto& exemplar : prompts::kDecomposeExemplarsV1) {
        prompt += "Question: ";
        prompt += exemplar.question;
        prompt += "\nDecomposition:\n";
        prompt += exemplar.decomposition;
        prompt += "\n\n";
    }
    prompt += "Question: " + question + "\nDecomposition:\n";

    ChatRequest request;
    request.model_id = model_id;
    request.temperature = temperature;
    request.messages = {{"system", std::string(prompts::kDecomposeSystemV1)},
                        {"user", prompt}};
    const std::string completion = llm.chat(request);

    DecomposedQuery out;
    out.original = question;
    out.sub_queries = parse_numbered_lines(completion);
    if (out.sub_queries.empty()) {
        out.sub_queries = {question};
        out.fallback = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Entity extraction & report selection
// ---------------------------------------------------------------------------

namespace {

bool is_boundary(const std::string& text, std::size_t pos) {
    return pos >= text.size() || !is_ascii_alnum(text[pos]);
}

// First case-insensitive whole-word occurrence of `needle`.
std::optional<std::size_t> find_word_ci(const std::string& haystack_lower,
                                        const std::string& needle_lower) {
    if (needle_lower.empty()) return std::nullopt;
    std::size_t from = 0;
    while (true) {
        const std::size_t pos = haystack_lower.find(needle_lower, from);
        if (pos == std::string::npos) return std::nullopt;
        const bool left_ok = pos == 0 || !is_ascii_alnum(haystack_lower[pos - 1]);
        if (left_ok && is_boundary(haystack_lower, pos + needle_lower.size())) return pos;
        from = pos + 1;
    }
}

struct AliasMatch {
    std::size_t pos;
    std::size_t len;
    std::string alias;  // surface form as configured in the gazetteer
};

}  // namespace

EntityRefs extract_entities(const std::string& question, const ReportStore& store) {
    EntityRefs out;

    // Years: bounded 4-digit runs.
    const std::string& q = question;
    for (std::size_t i = 0; i + 4 <= q.size(); ++i) {
        if (!is_ascii_digit(q[i])) continue;
        if (i > 0 && is_ascii_digit(q[i - 1])) continue;
        if (i + 4 < q.size() && is_ascii_digit(q[i + 4])) continue;
        const auto year = parse_long(std::string_view(q).substr(i, 4));
        if (year && *year >= 1990 && *year <= 2030 &&
            std::find(out.years.begin(), out.years.end(), static_cast<int>(*year)) ==
                out.years.end()) {
            out.years.push_back(static_cast<int>(*year));
        }
    }

    // Companies: longest non-overlapping alias matches, by position.
    const std::string lower = lower_ascii(question);
    std::vector<AliasMatch> matches;
    for (const auto& [ticker, name] : store.gazetteer().entries()) {
        for (const std::string& alias : {ticker, name}) {
            if (const auto pos = find_word_ci(lower, lower_ascii(alias))) {
                matches.push_back(AliasMatch{*pos, alias.size(), alias});
            }
        }
    }
    std::sort(matches.begin(), matches.end(), [](const AliasMatch& a, const AliasMatch& b) {
        if (a.pos != b.pos) return a.pos < b.pos;
        if (a.len != b.len) return a.len > b.len;
        return a.alias < b.alias;
    });
    std::size_t covered_end = 0;
    std::set<std::string> seen;
    for (const auto& match : matches) {
        if (match.pos < covered_end) continue;  // inside a longer, earlier match
        if (seen.insert(lower_ascii(match.alias)).second) out.companies.push_back(match.alias);
        covered_end = match.pos + match.len;
    }
    return out;
}

namespace {

bool company_matches_report(const std::string& alias, const Report& report,
                            const Gazetteer& gazetteer) {
    const std::string alias_lower = lower_ascii(alias);
    return alias_lower == lower_ascii(report.ticker) ||
           alias_lower == lower_ascii(gazetteer.name_for(report.ticker));
}

}  // namespace

std::vector<const Report*> select_reports(const EntityRefs& entities, const ReportStore& store) {
    if (entities.companies.empty() && entities.years.empty()) {
        throw AmbiguousQuery("no company or year to anchor report selection");
    }
    std::vector<const Report*> out;
    for (const Report& report : store.reports()) {
        const bool company_ok =
            entities.companies.empty() ||
            std::any_of(entities.companies.begin(), entities.companies.end(),
                        [&](const std::string& alias) {
                            return company_matches_report(alias, report, store.gazetteer());
                        });
        const bool year_ok = entities.years.empty() ||
                             std::find(entities.years.begin(), entities.years.end(),
                                       report.fiscal_year) != entities.years.end();
        if (company_ok && year_ok) out.push_back(&report);
    }
    if (out.empty()) {
        std::string what = "no report matches companies [";
        for (std::size_t i = 0; i < entities.companies.size(); ++i) {
            what += (i != 0 ? ", " : "") + entities.companies[i];
        }
        what += "] years [";
        for (std::size_t i = 0; i < entities.years.size(); ++i) {
            what += (i != 0 ? ", " : "") + std::to_string(entities.years[i]);
        }
        throw NoSuchReport(what + "]");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Page retrieval
// ---------------------------------------------------------------------------

RetrievalMethod retrieval_method_from_name(const std::string& name) {
    const std::string lower = lower_ascii(name);
    if (lower == "tfidf" || lower == "tf-idf") return RetrievalMethod::tfidf;
    if (lower == "bm25") return RetrievalMethod::bm25;
    throw DataError("unknown retrieval method '" + name + "' (expected tfidf or bm25)");
}

namespace {

std::string padded_page_id(int page_no) {
    std::string digits = std::to_string(page_no);
    if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
    return digits;
}

std::string page_document(const Page& page) {
    std::string doc = page.text;
    if (!doc.empty()) doc += '\n';
    SourceRef source;  // ids are irrelevant here; only the rendered rows matter
    for (const auto& table : page.tables) {
        for (const auto& unit : linearize_table(table, source)) {
            doc += unit.content;
            doc += '\n';
        }
    }
    return doc;
}

}  // namespace

SparseIndex build_page_index(const Report& report) {
    if (report.pages.empty()) {
        throw EmptyReport("report " + report.ticker + "/" + std::to_string(report.fiscal_year) +
                          " has no pages");
    }
    std::vector<std::pair<std::string, std::string>> docs;
    docs.reserve(report.pages.size());
    for (const auto& page : report.pages) {
        docs.emplace_back(padded_page_id(page.page_no), page_document(page));
    }
    return build_index(docs);
}

std::vector<ScoredPage> retrieve_pages(const std::string& sub_query, const Report& report,
                                       const SparseIndex& page_index, RetrievalMethod method,
                                       std::size_t n) {
    const std::vector<ScoredDoc> ranked =
        method == RetrievalMethod::tfidf ? score_tfidf(page_index, sub_query)
                                         : score_bm25(page_index, sub_query);
    const std::vector<ScoredDoc> top = top_n(ranked, n);

    std::vector<ScoredPage> out;
    out.reserve(top.size());
    for (const auto& doc : top) {
        const auto page_no = parse_long(doc.doc_id);
        if (!page_no) throw DataError("non-numeric page doc id '" + doc.doc_id + "'");
        out.push_back(ScoredPage{report.ticker, report.fiscal_year,
                                 static_cast<int>(*page_no), doc.score});
    }
    return out;
}

std::vector<ScoredPage> retrieve_pages(const std::string& sub_query, const Report& report,
                                       RetrievalMethod method, std::size_t n) {
    return retrieve_pages(sub_query, report, build_page_index(report), method, n);
}

std::vector<ScoredPage> merge_scored_pages(const std::vector<std::vector<ScoredPage>>& lists) {
    std::map<std::tuple<std::string, int, int>, double> best;
    for (const auto& list : lists) {
        for (const auto& page : list) {
            auto key = std::make_tuple(page.ticker, page.fiscal_year, page.page_no);
            auto [it, inserted] = best.emplace(key, page.score);
            if (!inserted) it->second = std::max(it->second, page.score);
        }
    }
    std::vector<ScoredPage> out;
    out.reserve(best.size());
    for (const auto& [key, score] : best) {
        out.push_back(ScoredPage{std::get<0>(key), std::get<1>(key), std::get<2>(key), score});
    }
    std::sort(out.begin(), out.end(), [](const ScoredPage& a, const ScoredPage& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.ticker != b.ticker) return a.ticker < b.ticker;
        if (a.fiscal_year != b.fiscal_year) return a.fiscal_year < b.fiscal_year;
        return a.page_no < b.page_no;
    });
    return out;
}

}  // namespace finrag
