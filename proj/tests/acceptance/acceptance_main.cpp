// Acceptance gate: one self-contained check per shipped guarantee, each
// printed as a single [PASS]/[FAIL]/[SKIP] line. Exits nonzero if any
// check fails. Check 10 needs an external dataset and is skipped unless
// FINQA_DATA_DIR points at a directory containing dev.json.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "finrag/context_rank.hpp"
#include "finrag/corpus.hpp"
#include "finrag/errors.hpp"
#include "finrag/eval.hpp"
#include "finrag/llm_gateway.hpp"
#include "finrag/neg_mining.hpp"
#include "finrag/primary.hpp"
#include "finrag/program.hpp"
#include "finrag/reader.hpp"
#include "finrag/sparse_index.hpp"
#include "finrag/util.hpp"

using namespace finrag;
using nlohmann::json;

namespace {

const std::filesystem::path kFixtures = FINRAG_FIXTURES_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome pass(std::string detail = "") { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt_ms(double ms) {
    std::ostringstream out;
    out.precision(2);
    out << std::fixed << ms << " ms";
    return out.str();
}

// ---------------------------------------------------------------------------
// 1. Program interpreter golden
// ---------------------------------------------------------------------------

Outcome check_program_golden() {
    (void)execute_program("divide(9896, 23.6%)");  // warm-up outside the timer
    const auto start = Clock::now();
    const ProgramResult result = execute_program("divide(9896, 23.6%)");
    const double elapsed = ms_since(start);

    if (result.is_boolean) {
        return fail("divide(9896, 23.6%) did not produce a number");
    }
    const std::string rendered = format_program_result(result);
    if (rendered != "41932.20339") {
        return fail("divide(9896, 23.6%) = " + rendered + ", want 41932.20339");
    }
    if (elapsed >= 1.0) return fail("took " + fmt_ms(elapsed) + ", budget 1 ms");
    return pass("divide(9896, 23.6%) = 41932.20339 in " + fmt_ms(elapsed));
}

// ---------------------------------------------------------------------------
// 2. Normalization goldens + idempotence
// ---------------------------------------------------------------------------

Outcome check_normalization_goldens() {
    struct NumberCase {
        const char* input;
        double value;
    };
    // Currency, thousands separators, parenthesized negatives, percents,
    // fractions, and combinations thereof.
    const std::vector<NumberCase> numbers = {
        {"90%", 0.90},        {"3/4", 0.75},         {"$1,234.50", 1234.5},
        {"(5.2)", -5.2},      {"(23.6%)", -0.236},   {"-14.44%", -0.1444},
        {"10.24", 10.24},     {"$31,921", 31921.0},  {"125%", 1.25},
        {"0.5", 0.5},         {"1,000,000", 1e6},    {"($2,500)", -2500.0},
        {"7", 7.0},           {"-0.2666", -0.2666},  {"42905", 42905.0},
        {"85.03%", 0.8503},   {"1/8", 0.125},        {"100/400", 0.25},
        {"(10%)", -0.10},     {"$0.98", 0.98},       {"14.1%", 0.141},
        {"-1,234", -1234.0},  {"23.6%", 0.236},      {"(0.5%)", -0.005},
    };
    struct TextCase {
        const char* input;
        AnswerKind kind;
        const char* raw;
    };
    const std::vector<TextCase> texts = {
        {"insufficient_context", AnswerKind::insufficient, "insufficient_context"},
        {"The provided context is insufficient_context here.", AnswerKind::insufficient, ""},
        {"INSUFFICIENT_CONTEXT", AnswerKind::insufficient, ""},
        {"yes", AnswerKind::text, "yes"},
        {"No", AnswerKind::text, "no"},
        {"increased", AnswerKind::text, "increased"},
        {"", AnswerKind::text, ""},
        {"2/0", AnswerKind::text, "2/0"},  // zero denominator is not a number
    };

    int cases = 0;
    // the two named goldens must hold with plain double equality
    if (normalize_answer("90%").value != 0.90) return fail("\"90%\" != 0.90");
    if (normalize_answer("3/4").value != 0.75) return fail("\"3/4\" != 0.75");

    auto idempotent = [](const NormalizedAnswer& a) {
        const NormalizedAnswer again = normalize_answer(a.rendered());
        return again.kind == a.kind && again.rendered() == a.rendered();
    };

    for (const auto& c : numbers) {
        const NormalizedAnswer a = normalize_answer(c.input);
        if (a.kind != AnswerKind::number) {
            return fail(std::string("\"") + c.input + "\" did not normalize to a number");
        }
        if (std::abs(a.value - c.value) > 1e-12 * std::max(1.0, std::abs(c.value))) {
            return fail(std::string("\"") + c.input + "\" -> " + format_double(a.value) +
                        ", want " + format_double(c.value));
        }
        if (!idempotent(a)) {
            return fail(std::string("normalize not idempotent on \"") + c.input + "\"");
        }
        ++cases;
    }
    for (const auto& c : texts) {
        const NormalizedAnswer a = normalize_answer(c.input);
        if (a.kind != c.kind) {
            return fail(std::string("\"") + c.input + "\" normalized to the wrong kind");
        }
        if (a.kind == AnswerKind::text && a.raw != c.raw) {
            return fail(std::string("\"") + c.input + "\" -> raw \"" + a.raw + "\", want \"" +
                        c.raw + "\"");
        }
        if (!idempotent(a)) {
            return fail(std::string("normalize not idempotent on \"") + c.input + "\"");
        }
        ++cases;
    }
    return pass(std::to_string(cases) + " golden cases, all idempotent");
}

// ---------------------------------------------------------------------------
// 3. Matching precedence
// ---------------------------------------------------------------------------

Outcome check_matching_semantics() {
    struct MatchCase {
        const char* pred;
        const char* gold_answer;
        const char* gold_exe;
        bool correct;
        MatchedVia via;
    };
    const std::vector<MatchCase> table = {
        // tolerant numeric matching against the executed program value
        {"41932.2", "41932.20339", "41932.20339", true, MatchedVia::isclose_exe},
        // more than 1% relative difference is incorrect
        {"42400", "41932.20339", "41932.20339", false, MatchedVia::none},
        // exact against the gold answer string wins first
        {"10.24", "10.24", "10.24", true, MatchedVia::exact_answer},
        // percent and decimal forms meet in normalized space
        {"0.8503", "85.03%", "0.85027447", true, MatchedVia::exact_answer},
        // exact against the execution answer when the gold string is prose
        {"3.2", "three point two", "3.2", true, MatchedVia::exact_exe},
        // boolean answers, case-insensitive
        {"yes", "yes", "", true, MatchedVia::exact_answer},
        {"No", "NO", "", true, MatchedVia::exact_answer},
        {"no", "yes", "", false, MatchedVia::none},
        // declining to answer is never correct
        {"insufficient_context", "10", "10", false, MatchedVia::none},
        // 1% relative window, numbers only
        {"100", "x", "101", true, MatchedVia::isclose_exe},
        {"100", "x", "101.5", false, MatchedVia::none},
        {"ten", "10", "10", false, MatchedVia::none},
        {"about 100", "100", "100", false, MatchedVia::none},
        // normalized forms of the same quantity
        {"0.75", "3/4", "0.75", true, MatchedVia::exact_answer},
        {"-0.236", "(23.6%)", "-0.236", true, MatchedVia::exact_answer},
        // five-decimal rounding defines numeric exactness
        {"0.14973", "0.1497", "0.149726", true, MatchedVia::exact_exe},
        {"5", "5.000001", "5.1", true, MatchedVia::exact_answer},
        {"0", "0", "1", true, MatchedVia::exact_answer},
        {"0", "1", "0.000001", true, MatchedVia::exact_exe},
        {"-5", "5", "-5", true, MatchedVia::exact_exe},
    };

    for (std::size_t i = 0; i < table.size(); ++i) {
        const MatchCase& c = table[i];
        const Verdict v = match_answer(normalize_answer(c.pred), c.gold_answer, c.gold_exe);
        if (v.correct != c.correct || v.matched_via != c.via) {
            return fail("case " + std::to_string(i + 1) + " (pred \"" + c.pred + "\" vs \"" +
                        c.gold_answer + "\"/\"" + c.gold_exe + "\"): got " +
                        (v.correct ? "correct" : "incorrect") + " via " +
                        to_string(v.matched_via));
        }
    }
    return pass(std::to_string(table.size()) + "-case precedence table verified");
}

// ---------------------------------------------------------------------------
// 4. Sparse retriever vs brute force, deterministic ties under parallelism
// ---------------------------------------------------------------------------

using Corpus = std::vector<std::pair<std::string, std::string>>;

std::vector<std::string> synth_vocab() {
    std::vector<std::string> vocab = {
        "revenue", "income",  "assets",   "liabilities", "margin",   "operating",
        "net",     "sales",   "expense",  "research",    "tax",      "equity",
        "shares",  "dilution", "goodwill", "cash",        "dividend", "segment",
        "growth",  "quarter",
    };
    for (int i = 0; i < 40; ++i) vocab.push_back("term" + std::to_string(i));
    return vocab;
}

Corpus synth_docs(std::mt19937& rng, const std::vector<std::string>& vocab, int count) {
    Corpus docs;
    std::uniform_int_distribution<int> len_dist(8, 15);
    std::uniform_int_distribution<std::size_t> term_dist(0, vocab.size() - 1);
    for (int d = 0; d < count; ++d) {
        std::string text;
        const int len = len_dist(rng);
        for (int t = 0; t < len; ++t) {
            // min of two draws skews toward the front of the vocabulary so
            // document frequencies vary from common to rare
            const std::size_t idx = std::min(term_dist(rng), term_dist(rng));
            if (t > 0) text += ' ';
            text += vocab[idx];
        }
        std::string id = std::to_string(d);
        docs.emplace_back("d" + std::string(3 - id.size(), '0') + id, std::move(text));
    }
    // duplicate texts force exact score ties; ranking must still be stable
    docs[53].second = docs[3].second;
    docs[67].second = docs[17].second;
    return docs;
}

std::vector<std::string> synth_queries(std::mt19937& rng, const std::vector<std::string>& vocab,
                                       int count) {
    std::vector<std::string> queries;
    std::uniform_int_distribution<int> len_dist(2, 5);
    std::uniform_int_distribution<std::size_t> term_dist(0, vocab.size() - 1);
    for (int q = 0; q < count; ++q) {
        std::string text;
        const int len = len_dist(rng);
        for (int t = 0; t < len; ++t) {
            if (t > 0) text += ' ';
            text += vocab[std::min(term_dist(rng), term_dist(rng))];
        }
        if (q % 9 == 7) text += " zzunknown";  // out-of-vocabulary term
        queries.push_back(std::move(text));
    }
    return queries;
}

// Brute-force reference: recomputes both formulas from scratch over plain
// token maps, no inverted index, no shared scoring code.
struct BruteForce {
    double n = 0.0;
    std::map<std::string, int> df;
    std::vector<std::map<std::string, int>> tfs;
    std::vector<double> lens;
    std::vector<std::string> ids;
    double avg_len = 0.0;

    explicit BruteForce(const Corpus& docs) {
        n = static_cast<double>(docs.size());
        double total = 0.0;
        for (const auto& [id, text] : docs) {
            const TokenStream toks = tokenize(text);
            lens.push_back(static_cast<double>(toks.size()));
            total += static_cast<double>(toks.size());
            std::map<std::string, int> tf;
            for (const auto& tok : toks) ++tf[tok];
            for (const auto& [term, count] : tf) ++df[term];
            tfs.push_back(std::move(tf));
            ids.push_back(id);
        }
        avg_len = docs.empty() ? 0.0 : total / n;
    }

    std::map<std::string, double> tfidf(const std::string& query) const {
        auto idf = [&](const std::string& term) {
            const double d = df.count(term) ? static_cast<double>(df.at(term)) : 0.0;
            return std::log((1.0 + n) / (1.0 + d)) + 1.0;
        };
        std::map<std::string, int> qtf;
        for (const auto& tok : tokenize(query)) ++qtf[tok];
        std::map<std::string, double> qvec;
        double qnorm = 0.0;
        for (const auto& [term, count] : qtf) {
            if (!df.count(term)) continue;
            const double w = count * idf(term);
            qvec[term] = w;
            qnorm += w * w;
        }
        qnorm = std::sqrt(qnorm);

        std::map<std::string, double> scores;
        for (std::size_t d = 0; d < tfs.size(); ++d) {
            double dot = 0.0, dnorm = 0.0;
            for (const auto& [term, count] : tfs[d]) {
                const double w = count * idf(term);
                dnorm += w * w;
                const auto it = qvec.find(term);
                if (it != qvec.end()) dot += w * it->second;
            }
            dnorm = std::sqrt(dnorm);
            scores[ids[d]] = (qnorm > 0.0 && dnorm > 0.0) ? dot / (qnorm * dnorm) : 0.0;
        }
        return scores;
    }

    std::map<std::string, double> bm25(const std::string& query, double k1 = 1.5,
                                       double b = 0.75) const {
        std::map<std::string, double> scores;
        for (std::size_t d = 0; d < tfs.size(); ++d) {
            double score = 0.0;
            for (const auto& qterm : tokenize(query)) {  // once per occurrence
                if (!df.count(qterm)) continue;
                const double dfi = static_cast<double>(df.at(qterm));
                const double idf = std::log(1.0 + (n - dfi + 0.5) / (dfi + 0.5));
                const double tf =
                    tfs[d].count(qterm) ? static_cast<double>(tfs[d].at(qterm)) : 0.0;
                const double denom = tf + k1 * (1.0 - b + b * lens[d] / avg_len);
                if (denom > 0.0) score += idf * (tf * (k1 + 1.0)) / denom;
            }
            scores[ids[d]] = score;
        }
        return scores;
    }
};

bool canonically_sorted(const std::vector<ScoredDoc>& ranked) {
    for (std::size_t i = 1; i < ranked.size(); ++i) {
        if (ranked[i - 1].score < ranked[i].score) return false;
        if (ranked[i - 1].score == ranked[i].score &&
            ranked[i - 1].doc_id >= ranked[i].doc_id) {
            return false;
        }
    }
    return true;
}

Outcome check_sparse_oracle() {
    const auto start = Clock::now();
    std::mt19937 rng(271828);
    const auto vocab = synth_vocab();
    const Corpus docs = synth_docs(rng, vocab, 100);
    const auto queries = synth_queries(rng, vocab, 50);

    const SparseIndex index = build_index(docs);
    const BruteForce oracle(docs);

    for (const auto& query : queries) {
        const auto got_tfidf = score_tfidf(index, query);
        const auto got_bm25 = score_bm25(index, query);
        if (got_tfidf.size() != docs.size() || got_bm25.size() != docs.size()) {
            return fail("ranking does not cover every document for query \"" + query + "\"");
        }
        if (!canonically_sorted(got_tfidf) || !canonically_sorted(got_bm25)) {
            return fail("ranking not in canonical order for query \"" + query + "\"");
        }
        const auto want_tfidf = oracle.tfidf(query);
        const auto want_bm25 = oracle.bm25(query);
        for (const ScoredDoc& sd : got_tfidf) {
            if (std::abs(sd.score - want_tfidf.at(sd.doc_id)) > 1e-9) {
                return fail("tfidf score for " + sd.doc_id + " off by more than 1e-9 on \"" +
                            query + "\"");
            }
        }
        for (const ScoredDoc& sd : got_bm25) {
            if (std::abs(sd.score - want_bm25.at(sd.doc_id)) > 1e-9) {
                return fail("bm25 score for " + sd.doc_id + " off by more than 1e-9 on \"" +
                            query + "\"");
            }
        }
    }

    // eight threads ranking the same queries concurrently must agree byte
    // for byte, ties included
    auto run_all = [&](std::string& out) {
        for (const auto& query : queries) {
            for (const ScoredDoc& sd : score_tfidf(index, query)) {
                out += sd.doc_id;
                out += '|';
            }
            for (const ScoredDoc& sd : score_bm25(index, query)) {
                out += sd.doc_id;
                out += '|';
            }
            out += '\n';
        }
    };
    std::vector<std::string> transcripts(8);
    std::vector<std::thread> workers;
    workers.reserve(transcripts.size());
    for (auto& t : transcripts) workers.emplace_back(run_all, std::ref(t));
    for (auto& w : workers) w.join();
    for (std::size_t i = 1; i < transcripts.size(); ++i) {
        if (transcripts[i] != transcripts[0]) {
            return fail("parallel run " + std::to_string(i) + " ranked differently");
        }
    }

    const double elapsed = ms_since(start);
    if (elapsed >= 5000.0) return fail("took " + fmt_ms(elapsed) + ", budget 5 s");
    return pass("100 docs x 50 queries, both methods within 1e-9, 8-way stable, " +
                fmt_ms(elapsed));
}

// ---------------------------------------------------------------------------
// 5. Cluster negative mining vs exhaustive search
// ---------------------------------------------------------------------------

Outcome check_mining_oracle() {
    const auto start = Clock::now();
    std::mt19937 rng(161803);
    const auto vocab = synth_vocab();
    const MiningScorers scorers = MiningScorers::offline();
    std::uniform_int_distribution<int> len_dist(5, 12);
    std::uniform_int_distribution<std::size_t> term_dist(0, vocab.size() - 1);

    auto synth_text = [&](int len) {
        std::string text;
        for (int t = 0; t < len; ++t) {
            if (t > 0) text += ' ';
            text += vocab[std::min(term_dist(rng), term_dist(rng))];
        }
        return text;
    };

    for (int qi = 0; qi < 50; ++qi) {
        const std::string query = synth_text(4);
        const int pool_size = 120 + (qi * 7) % 81;  // 120..200
        std::vector<ContextUnit> candidates;
        candidates.reserve(pool_size);
        for (int j = 0; j < pool_size; ++j) {
            std::string idx = std::to_string(j);
            ContextUnit unit;
            unit.id = "q" + std::to_string(qi) + "/u" + std::string(3 - idx.size(), '0') + idx;
            unit.kind = UnitKind::text_sentence;
            unit.content = synth_text(len_dist(rng));
            candidates.push_back(std::move(unit));
        }
        // duplicated contents create identical feature vectors; ties must
        // resolve by unit id, identically in library and oracle
        candidates[10].content = candidates[4].content;
        candidates[11].content = candidates[4].content;

        std::vector<std::string> positives;
        std::uniform_int_distribution<int> pos_dist(0, pool_size - 1);
        std::set<int> chosen;
        while (static_cast<int>(chosen.size()) < 1 + qi % 3) chosen.insert(pos_dist(rng));
        for (int c : chosen) positives.push_back(candidates[c].id);
        const int k = 1 + qi % 3;

        const std::vector<TrainingPair> got =
            mine_cluster_negatives(query, positives, candidates, scorers, k);

        // --- exhaustive reference, straight from the raw scorer outputs ---
        std::array<std::map<std::string, double>, 4> raw;
        RelevanceScorer* slots[4] = {scorers.tfidf.get(), scorers.bm25.get(),
                                     scorers.emb_primary.get(), scorers.emb_secondary.get()};
        for (int s = 0; s < 4; ++s) {
            for (const ScoredContext& sc : score_contexts(query, candidates, *slots[s])) {
                raw[s][sc.unit.id] = sc.s;
            }
        }
        std::map<std::string, std::array<double, 4>> vecs;
        for (int s = 0; s < 4; ++s) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto& unit : candidates) {
                lo = std::min(lo, raw[s][unit.id]);
                hi = std::max(hi, raw[s][unit.id]);
            }
            for (const auto& unit : candidates) {
                vecs[unit.id][s] = hi > lo ? (raw[s][unit.id] - lo) / (hi - lo) : 0.0;
            }
        }
        const std::set<std::string> positive_set(positives.begin(), positives.end());
        std::set<std::string> expected_negatives;
        for (const auto& pos : positives) {
            std::vector<std::pair<double, std::string>> dists;
            for (const auto& unit : candidates) {
                if (positive_set.count(unit.id)) continue;
                double d2 = 0.0;
                for (int s = 0; s < 4; ++s) {
                    const double diff = vecs[unit.id][s] - vecs[pos][s];
                    d2 += diff * diff;
                }
                dists.emplace_back(std::sqrt(d2), unit.id);
            }
            std::sort(dists.begin(), dists.end());  // distance asc, then id asc
            for (int i = 0; i < k && i < static_cast<int>(dists.size()); ++i) {
                expected_negatives.insert(dists[i].second);
            }
        }

        // --- compare shape, membership, ordering, and gold exclusion ---
        std::set<std::string> got_negatives;
        std::set<std::string> got_positives;
        for (const auto& pair : got) {
            if (pair.query != query) return fail("pair carries the wrong query");
            if (pair.label == PairLabel::negative) {
                if (pair.origin != PairOrigin::cluster_knn) {
                    return fail("negative pair has origin " + to_string(pair.origin));
                }
                if (positive_set.count(pair.unit_id)) {
                    return fail("gold context " + pair.unit_id + " mined as negative");
                }
                got_negatives.insert(pair.unit_id);
            } else {
                got_positives.insert(pair.unit_id);
            }
        }
        if (got_positives != positive_set) {
            return fail("positive pairs do not echo the gold contexts");
        }
        if (got_negatives != expected_negatives) {
            return fail("query " + std::to_string(qi) + ": mined " +
                        std::to_string(got_negatives.size()) + " negatives, exhaustive search " +
                        std::to_string(expected_negatives.size()) +
                        " (or membership differs)");
        }
    }

    const double elapsed = ms_since(start);
    if (elapsed >= 5000.0) return fail("took " + fmt_ms(elapsed) + ", budget 5 s");
    return pass("50 queries, library matches exhaustive search, gold never negative, " +
                fmt_ms(elapsed));
}

// ---------------------------------------------------------------------------
// 6. Recall correctness and monotonicity
// ---------------------------------------------------------------------------

Outcome check_recall() {
    struct RecallCase {
        std::vector<std::string> ranked;
        std::vector<std::string> gold;
        std::size_t n;
        int want;
    };
    // hand-counted: 10 hits, 10 misses -> 50.0%
    const std::vector<RecallCase> table = {
        {{"a", "b", "c"}, {"a"}, 1, 1},
        {{"a", "b", "c"}, {"b"}, 1, 0},
        {{"a", "b", "c"}, {"b"}, 2, 1},
        {{"a", "b", "c"}, {"c"}, 2, 0},
        {{"a", "b", "c"}, {"c"}, 3, 1},
        {{"a", "b", "c"}, {"z"}, 3, 0},
        {{"a", "b", "c"}, {"z", "a"}, 1, 1},
        {{"a", "b", "c"}, {"z", "c"}, 2, 0},
        {{"p1", "p2", "p3", "p4", "p5"}, {"p5"}, 5, 1},
        {{"p1", "p2", "p3", "p4", "p5"}, {"p5"}, 4, 0},
        {{"p1", "p2", "p3", "p4", "p5"}, {"p4", "p5"}, 4, 1},
        {{"p1"}, {"p1"}, 3, 1},
        {{}, {"p1"}, 3, 0},
        {{"x", "y"}, {"y", "x"}, 1, 1},
        {{"x", "y"}, {"q"}, 2, 0},
        {{"m1", "m2", "m3"}, {"m3", "m9"}, 2, 0},
        {{"m1", "m2", "m3"}, {"m3", "m9"}, 3, 1},
        {{"r", "s", "t", "u"}, {"u"}, 1, 0},
        {{"r", "s", "t", "u"}, {"r", "u"}, 1, 1},
        {{"r", "s", "t", "u"}, {"v", "w"}, 4, 0},
    };
    std::vector<int> hits;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const RecallCase& c = table[i];
        const int got = recall_hit(c.ranked, c.gold, c.n);
        if (got != c.want) {
            return fail("hand-counted case " + std::to_string(i + 1) + ": got " +
                        std::to_string(got) + ", want " + std::to_string(c.want));
        }
        hits.push_back(got);
    }
    const double pct = recall_percentage(hits);
    if (std::abs(pct - 50.0) > 1e-12) {
        return fail("20-query recall " + format_double(pct) + ", hand count says 50");
    }

    // hit@n implies hit@m for every m > n
    std::mt19937 rng(314159);
    std::uniform_int_distribution<int> len_dist(1, 20);
    for (int trial = 0; trial < 1000; ++trial) {
        const int len = len_dist(rng);
        std::vector<std::string> ranked;
        for (int i = 0; i < len; ++i) ranked.push_back("id" + std::to_string(i));
        std::shuffle(ranked.begin(), ranked.end(), rng);
        std::vector<std::string> gold;
        std::uniform_int_distribution<int> gold_dist(0, len + 4);
        const int gold_count = 1 + gold_dist(rng) % 3;
        for (int g = 0; g < gold_count; ++g) {
            gold.push_back("id" + std::to_string(gold_dist(rng)));  // may be absent
        }
        std::uniform_int_distribution<int> n_dist(1, len + 2);
        int n = n_dist(rng), m = n_dist(rng);
        if (n > m) std::swap(n, m);
        const int at_n = recall_hit(ranked, gold, static_cast<std::size_t>(n));
        const int at_m = recall_hit(ranked, gold, static_cast<std::size_t>(m));
        if (at_n > at_m) {
            return fail("monotonicity violated on trial " + std::to_string(trial));
        }
    }
    return pass("20 hand-counted cases = 50.0%, monotone on 1000 random instances");
}

// ---------------------------------------------------------------------------
// 7. Dynamic exemplar selection
// ---------------------------------------------------------------------------

Outcome check_exemplar_selection() {
    const ExemplarStore store = ExemplarStore::load(kFixtures / "exemplars.jsonl");
    if (store.empty()) return fail("bundled exemplar store is empty");
    const TextEmbedder embedder = TextEmbedder::hashing(64);

    auto transcript = [&]() {
        std::string out;
        for (const Exemplar& e : store.exemplars()) {
            const auto selected = select_exemplars(e.question, store, 3, embedder);
            if (selected.empty() || selected[0].id != e.id) {
                return std::string();  // signals the self-selection failure
            }
            for (const Exemplar& s : selected) {
                out += s.id;
                out += '\x1f';
                out += s.question;
                out += '\x1f';
                for (const auto& step : s.reasoning_chain) {
                    out += step;
                    out += '\x1e';
                }
            }
            out += '\n';
        }
        return out;
    };

    const std::string first = transcript();
    if (first.empty()) {
        return fail("a stored question did not select its own exemplar first");
    }
    const std::string second = transcript();
    if (first != second) return fail("selection differed between two identical runs");
    return pass(std::to_string(store.size()) +
                " stored questions each self-select first; two runs byte-identical");
}

// ---------------------------------------------------------------------------
// 8. End-to-end determinism on the bundled fixture
// ---------------------------------------------------------------------------

EvalReport replay_e2e_run(int threads) {
    const ReportStore store = load_reports(kFixtures / "reports");
    const std::vector<QARecord> dataset = load_finqa(kFixtures / "test.json");
    const ExemplarStore exemplars = ExemplarStore::load(kFixtures / "exemplars.jsonl");
    ReplayClient llm(ReplayStore::load(kFixtures / "replay.jsonl"));
    LexicalTfidfScorer scorer;
    EvalConfig config;
    config.pages_n = 8;
    config.contexts_k = 5;
    config.threads = threads;
    return run_e2e_eval(dataset, store, scorer, llm, exemplars, TextEmbedder::hashing(64),
                        config);
}

Outcome check_e2e_determinism() {
    const auto start = Clock::now();
    const EvalReport first = replay_e2e_run(1);
    const EvalReport second = replay_e2e_run(1);
    const EvalReport threaded = replay_e2e_run(4);
    const double elapsed = ms_since(start);

    // hand-derived from the fixture: 7 of the 10 generations survive matching
    if (first.total != 10 || first.correct != 7 || first.accuracy != 70.0) {
        return fail("accuracy " + format_double(first.accuracy) + " (" +
                    std::to_string(first.correct) + "/" + std::to_string(first.total) +
                    "), hand-derived verdicts say 70.0 (7/10)");
    }
    for (const auto& result : first.results) {
        if (!result.failure.empty()) {
            return fail(result.id + " failed: " + result.failure);
        }
    }
    if (first.to_json() != second.to_json()) {
        return fail("two single-threaded runs produced different reports");
    }
    if (first.to_json() != threaded.to_json()) {
        return fail("4-thread run produced a different report");
    }
    if (elapsed >= 10000.0) return fail("took " + fmt_ms(elapsed) + ", budget 10 s");
    return pass("3 runs (1/1/4 threads) byte-identical, accuracy 70.0 (7/10), " +
                fmt_ms(elapsed) + ", replay only");
}

// ---------------------------------------------------------------------------
// 9. Decomposition golden
// ---------------------------------------------------------------------------

Outcome check_decomposition_golden() {
    ReplayClient llm(ReplayStore::load(kFixtures / "replay.jsonl"));
    const std::string question =
        "What is the percentage change in the fair value of the options for Apple "
        "from 2009 to 2010?";
    const DecomposedQuery d = decompose_query(question, llm);
    const std::vector<std::string> want = {
        "What is the fair value of options for Apple in 2009?",
        "What is the fair value of options for Apple in 2010?",
    };
    if (d.fallback) return fail("decomposition fell back to the original question");
    if (d.sub_queries != want) {
        std::string got;
        for (const auto& q : d.sub_queries) got += "\n  " + q;
        return fail("sub-queries differ from the recorded exchange:" + got);
    }
    return pass("Apple 2009->2010 query splits into the two recorded sub-queries");
}

// ---------------------------------------------------------------------------
// 10. Optional: real-dataset page retrieval recall
// ---------------------------------------------------------------------------

Outcome check_dataset_recall(const std::filesystem::path& data_dir) {
    const std::filesystem::path dev_path = data_dir / "dev.json";
    if (!std::filesystem::exists(dev_path)) {
        return fail("FINQA_DATA_DIR is set but " + dev_path.string() + " does not exist");
    }
    std::ifstream in(dev_path);
    json records;
    in >> records;
    if (!records.is_array() || records.empty()) {
        return fail(dev_path.string() + " is not a non-empty JSON array");
    }

    // Each record carries the page it was annotated from; assembling those
    // pages (narrative text plus linearized table rows) yields a pseudo
    // corpus over which page retrieval can be scored.
    Corpus docs;
    std::set<std::string> seen;
    std::vector<std::pair<std::string, std::string>> queries;  // question, gold page
    for (const auto& rec : records) {
        const std::string page = rec.value("filename", "");
        const std::string question = rec.at("qa").value("question", "");
        if (page.empty() || question.empty()) continue;
        queries.emplace_back(question, page);
        if (!seen.insert(page).second) continue;
        std::string text;
        for (const auto& part : {"pre_text", "post_text"}) {
            if (!rec.contains(part)) continue;
            for (const auto& sentence : rec.at(part)) {
                text += sentence.get<std::string>();
                text += ' ';
            }
        }
        if (rec.contains("table") && rec.at("table").is_array() && rec.at("table").size() > 1) {
            const auto& table = rec.at("table");
            const auto& header = table.at(0);
            for (std::size_t r = 1; r < table.size(); ++r) {
                const auto& row = table.at(r);
                for (std::size_t c = 1; c < row.size() && c < header.size(); ++c) {
                    text += "the " + header.at(c).get<std::string>() + " of " +
                            row.at(0).get<std::string>() + " is " +
                            row.at(c).get<std::string>() + " ; ";
                }
            }
        }
        docs.emplace_back(page, std::move(text));
    }

    const SparseIndex index = build_index(docs);
    std::vector<int> hits3, hits5;
    for (const auto& [question, gold] : queries) {
        const auto ranked = top_n(score_tfidf(index, question), 5);
        std::vector<std::string> ids;
        for (const auto& sd : ranked) ids.push_back(sd.doc_id);
        hits3.push_back(recall_hit(ids, {gold}, 3));
        hits5.push_back(recall_hit(ids, {gold}, 5));
    }
    const double r3 = recall_percentage(hits3);
    const double r5 = recall_percentage(hits5);
    std::ostringstream detail;
    detail.precision(1);
    detail << std::fixed << "recall@3 " << r3 << " (target 81.3 +/- 3), recall@5 " << r5
           << " (target 89.4 +/- 3) over " << queries.size() << " questions";
    if (std::abs(r3 - 81.3) > 3.0 || std::abs(r5 - 89.4) > 3.0) {
        return fail(detail.str() + "; sensitive to the exact weighting variant");
    }
    return pass(detail.str());
}

struct Criterion {
    std::string name;
    Outcome (*run)();
};

}  // namespace

int main() {
    // an unroutable loopback port guarantees any accidental live HTTP call
    // fails fast instead of silently reaching a network
    setenv("LLM_BASE_URL", "http://127.0.0.1:1", 1);
    setenv("EMBED_BASE_URL", "http://127.0.0.1:1", 1);

    const std::vector<Criterion> criteria = {
        {"program interpreter golden", check_program_golden},
        {"answer normalization goldens", check_normalization_goldens},
        {"answer matching precedence", check_matching_semantics},
        {"sparse retrieval vs brute force", check_sparse_oracle},
        {"cluster negative mining vs exhaustive search", check_mining_oracle},
        {"recall correctness and monotonicity", check_recall},
        {"dynamic exemplar selection", check_exemplar_selection},
        {"end-to-end replay determinism", check_e2e_determinism},
        {"query decomposition golden", check_decomposition_golden},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].run();
        } catch (const std::exception& e) {
            outcome = fail(std::string("unexpected exception: ") + e.what());
        }
        std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << (i + 1) << ". "
                  << criteria[i].name;
        if (!outcome.detail.empty()) std::cout << " — " << outcome.detail;
        std::cout << "\n";
        if (!outcome.pass) ++failures;
    }

    const char* data_dir = std::getenv("FINQA_DATA_DIR");
    if (data_dir == nullptr || *data_dir == '\0') {
        std::cout << "[SKIP] 10. real-dataset page retrieval recall — set FINQA_DATA_DIR to a "
                     "directory containing dev.json to enable\n";
    } else {
        Outcome outcome;
        try {
            outcome = check_dataset_recall(data_dir);
        } catch (const std::exception& e) {
            outcome = fail(std::string("unexpected exception: ") + e.what());
        }
        std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ")
                  << "10. real-dataset page retrieval recall";
        if (!outcome.detail.empty()) std::cout << " — " << outcome.detail;
        std::cout << "\n";
        if (!outcome.pass) ++failures;
    }

    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria satisfied\n";
    return 0;
}
