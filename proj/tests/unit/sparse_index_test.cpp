#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "finrag/errors.hpp"
#include "finrag/sparse_index.hpp"

using namespace finrag;

// ---------------------------------------------------------------------------
// Independent oracle: naive map-based TF-IDF cosine and BM25, written straight
// from the formulas with no shared code beyond the tokenizer contract.
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> naive_tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        const bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                           (c >= 'A' && c <= 'Z');
        if (alnum) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

using Corpus = std::vector<std::pair<std::string, std::string>>;

std::map<std::string, double> naive_tfidf_scores(const Corpus& docs, const std::string& query) {
    const double n = static_cast<double>(docs.size());
    std::map<std::string, int> df;
    std::vector<std::map<std::string, int>> tfs;
    for (const auto& [id, text] : docs) {
        std::map<std::string, int> tf;
        for (const auto& tok : naive_tokenize(text)) ++tf[tok];
        for (const auto& [term, count] : tf) ++df[term];
        tfs.push_back(std::move(tf));
    }
    auto idf = [&](const std::string& term) {
        return std::log((1.0 + n) / (1.0 + static_cast<double>(df.count(term) ? df.at(term) : 0))) + 1.0;
    };

    // query vector over its own term counts, dropping out-of-vocabulary terms
    std::map<std::string, int> qtf;
    for (const auto& tok : naive_tokenize(query)) ++qtf[tok];
    std::map<std::string, double> qvec;
    double qnorm = 0.0;
    for (const auto& [term, count] : qtf) {
        if (!df.count(term)) continue;
        const double w = static_cast<double>(count) * idf(term);
        qvec[term] = w;
        qnorm += w * w;
    }
    qnorm = std::sqrt(qnorm);

    std::map<std::string, double> scores;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        double dot = 0.0, dnorm = 0.0;
        for (const auto& [term, count] : tfs[d]) {
            const double w = static_cast<double>(count) * idf(term);
            dnorm += w * w;
            if (qvec.count(term)) dot += w * qvec.at(term);
        }
        dnorm = std::sqrt(dnorm);
        scores[docs[d].first] =
            (qnorm > 0.0 && dnorm > 0.0) ? dot / (qnorm * dnorm) : 0.0;
    }
    return scores;
}

std::map<std::string, double> naive_bm25_scores(const Corpus& docs, const std::string& query,
                                                double k1 = 1.5, double b = 0.75) {
    const double n = static_cast<double>(docs.size());
    std::map<std::string, int> df;
    std::vector<std::map<std::string, int>> tfs;
    std::vector<double> lens;
    double total_len = 0.0;
    for (const auto& [id, text] : docs) {
        const auto toks = naive_tokenize(text);
        lens.push_back(static_cast<double>(toks.size()));
        total_len += static_cast<double>(toks.size());
        std::map<std::string, int> tf;
        for (const auto& tok : toks) ++tf[tok];
        for (const auto& [term, count] : tf) ++df[term];
        tfs.push_back(std::move(tf));
    }
    const double avg_len = docs.empty() ? 0.0 : total_len / n;

    std::map<std::string, double> scores;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        double score = 0.0;
        for (const auto& qterm : naive_tokenize(query)) {  // once per occurrence
            if (!df.count(qterm)) continue;
            const double dfi = static_cast<double>(df.at(qterm));
            const double idf = std::log(1.0 + (n - dfi + 0.5) / (dfi + 0.5));
            const double tf =
                tfs[d].count(qterm) ? static_cast<double>(tfs[d].at(qterm)) : 0.0;
            const double denom = tf + k1 * (1.0 - b + b * lens[d] / avg_len);
            if (denom > 0.0) score += idf * (tf * (k1 + 1.0)) / denom;
        }
        scores[docs[d].first] = score;
    }
    return scores;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    const TokenStream t = tokenize("Net sales, 23.6% ($1,234)!");
    const TokenStream expected{"net", "sales", "23", "6", "1", "234"};
    CHECK(t == expected);
    CHECK(tokenize("").empty());
    CHECK(tokenize("...").empty());
}

TEST_CASE("build_index rejects duplicate ids and computes stats") {
    const Corpus docs{{"a", "x y z"}, {"b", "x x"}};
    const SparseIndex index = build_index(docs);
    CHECK(index.size() == 2);
    CHECK(index.avg_doc_len == doctest::Approx(2.5));
    CHECK(index.df.at("x") == 2);
    CHECK(index.df.at("y") == 1);
    CHECK_THROWS_AS(build_index(Corpus{{"a", "x"}, {"a", "y"}}), DuplicateDocId);
}

TEST_CASE("tfidf and bm25 agree with the naive oracle on a random corpus") {
    std::mt19937 rng(7);
    const std::vector<std::string> vocab{"revenue", "income",  "assets", "liabilities",
                                         "shares",  "expense", "growth", "margin",
                                         "cash",    "debt",    "sales",  "units"};
    Corpus docs;
    for (int d = 0; d < 40; ++d) {
        std::string text;
        const int len = 3 + static_cast<int>(rng() % 20);
        for (int i = 0; i < len; ++i) {
            text += vocab[rng() % vocab.size()];
            text += ' ';
        }
        docs.emplace_back("doc" + std::to_string(100 + d), text);
    }
    const SparseIndex index = build_index(docs);

    for (int q = 0; q < 25; ++q) {
        std::string query;
        const int len = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < len; ++i) {
            query += vocab[rng() % vocab.size()];
            query += ' ';
        }
        CAPTURE(query);

        const auto oracle_tfidf = naive_tfidf_scores(docs, query);
        for (const ScoredDoc& sd : score_tfidf(index, query)) {
            CHECK(sd.score == doctest::Approx(oracle_tfidf.at(sd.doc_id)).epsilon(1e-9));
        }
        const auto oracle_bm25 = naive_bm25_scores(docs, query);
        for (const ScoredDoc& sd : score_bm25(index, query)) {
            CHECK(sd.score == doctest::Approx(oracle_bm25.at(sd.doc_id)).epsilon(1e-9));
        }
    }
}

TEST_CASE("ranked lists use score desc then doc id asc, and results are complete") {
    const Corpus docs{{"d3", "alpha beta"}, {"d1", "alpha beta"}, {"d2", "gamma delta"}};
    const SparseIndex index = build_index(docs);
    const auto ranked = score_tfidf(index, "alpha");
    REQUIRE(ranked.size() == 3);
    // d1 and d3 tie with identical content; id ascending breaks the tie
    CHECK(ranked[0].doc_id == "d1");
    CHECK(ranked[1].doc_id == "d3");
    CHECK(ranked[0].score == doctest::Approx(ranked[1].score));
    CHECK(ranked[2].doc_id == "d2");
    CHECK(ranked[2].score == doctest::Approx(0.0));

    const auto top = top_n(ranked, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].doc_id == "d1");
    CHECK(top[1].doc_id == "d3");
    CHECK(top_n(ranked, 99).size() == 3);
}

TEST_CASE("queries made only of unseen terms score zero everywhere") {
    const SparseIndex index = build_index({{"a", "alpha beta"}, {"b", "gamma"}});
    for (const auto& scorer_result :
         {score_tfidf(index, "zzz qqq"), score_bm25(index, "zzz qqq")}) {
        REQUIRE(scorer_result.size() == 2);
        for (const auto& sd : scorer_result) CHECK(sd.score == doctest::Approx(0.0));
        CHECK(scorer_result[0].doc_id == "a");  // id ascending on an all-zero tie
    }
}

TEST_CASE("bm25 counts repeated query terms once per occurrence") {
    const SparseIndex index = build_index({{"a", "alpha beta"}, {"b", "beta gamma"}});
    const auto once = score_bm25(index, "alpha");
    const auto twice = score_bm25(index, "alpha alpha");
    auto score_of = [](const std::vector<ScoredDoc>& v, const std::string& id) {
        for (const auto& sd : v)
            if (sd.doc_id == id) return sd.score;
        return -1.0;
    };
    CHECK(score_of(twice, "a") == doctest::Approx(2.0 * score_of(once, "a")));
}

TEST_CASE("index persistence round-trips scores and digest") {
    const Corpus docs{{"p1", "alpha beta gamma"}, {"p2", "beta beta delta"}};
    const SparseIndex index = build_index(docs);
    const std::string digest = corpus_digest(docs);
    CHECK(digest.size() == 16);
    CHECK(digest == corpus_digest(docs));                  // stable
    CHECK(digest != corpus_digest(Corpus{{"p1", "x"}}));   // content-sensitive

    const auto path = std::filesystem::temp_directory_path() / "finrag_index_roundtrip.json";
    save_index(index, path, digest);
    std::string loaded_digest;
    const SparseIndex loaded = load_index(path, &loaded_digest);
    std::filesystem::remove(path);

    CHECK(loaded_digest == digest);
    const auto before = score_bm25(index, "beta delta");
    const auto after = score_bm25(loaded, "beta delta");
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(before[i].doc_id == after[i].doc_id);
        CHECK(before[i].score == doctest::Approx(after[i].score).epsilon(1e-12));
    }
}
