#include "finrag/sparse_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"

#include "finrag/errors.hpp"
#include "finrag/util.hpp"

namespace finrag {

TokenStream tokenize(std::string_view text) {
    TokenStream tokens;
    std::string current;
    for (char c : text) {
        if (is_ascii_alnum(c)) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            current.push_back(c);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

void sort_scored(std::vector<ScoredDoc>& docs) {
    std::sort(docs.begin(), docs.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
}

SparseIndex build_index(const std::vector<std::pair<std::string, std::string>>& docs) {
    SparseIndex index;
    std::set<std::string> seen;
    for (const auto& [doc_id, text] : docs) {
        if (!seen.insert(doc_id).second) throw DuplicateDocId("duplicate doc id: " + doc_id);
        const auto ordinal = static_cast<std::uint32_t>(index.doc_ids.size());
        index.doc_ids.push_back(doc_id);

        // Count terms in sorted order so postings vectors come out identical
        // regardless of how the caller ordered the text.
        std::map<std::string, std::uint32_t> counts;
        std::uint32_t length = 0;
        for (auto& token : tokenize(text)) {
            ++counts[token];
            ++length;
        }
        index.doc_lengths.push_back(length);
        for (auto& [term, tf] : counts) {
            index.postings[term].emplace_back(ordinal, tf);
            ++index.df[term];
        }
    }
    if (!index.doc_ids.empty()) {
        double total = 0.0;
        for (auto len : index.doc_lengths) total += len;
        index.avg_doc_len = total / static_cast<double>(index.doc_ids.size());
    }
    return index;
}

namespace {

// Query as (term, occurrence count), terms sorted so accumulation order is fixed.
std::map<std::string, std::uint32_t> query_counts(const std::string& query) {
    std::map<std::string, std::uint32_t> counts;
    for (auto& token : tokenize(query)) ++counts[token];
    return counts;
}

std::vector<ScoredDoc> finish(const SparseIndex& index, const std::vector<double>& scores) {
    std::vector<ScoredDoc> out;
    out.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        out.push_back({index.doc_ids[i], scores[i]});
    }
    sort_scored(out);
    return out;
}

}  // namespace

std::vector<ScoredDoc> score_tfidf(const SparseIndex& index, const std::string& query) {
    const auto n_docs = static_cast<double>(index.size());
    auto idf = [&](std::uint32_t df) {
        return std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df))) + 1.0;
    };

    // Document norms over the full vocabulary, accumulated term-by-term in
    // sorted order for run-to-run determinism.
    std::vector<double> norm_sq(index.size(), 0.0);
    {
        std::map<std::string, std::uint32_t> vocab(index.df.begin(), index.df.end());
        for (const auto& [term, df] : vocab) {
            const double w = idf(df);
            for (const auto& [ordinal, tf] : index.postings.at(term)) {
                const double x = static_cast<double>(tf) * w;
                norm_sq[ordinal] += x * x;
            }
        }
    }

    std::vector<double> dot(index.size(), 0.0);
    double query_norm_sq = 0.0;
    for (const auto& [term, qtf] : query_counts(std::string(query))) {
        auto it = index.df.find(term);
        if (it == index.df.end()) continue;  // out of vocabulary
        const double w = idf(it->second);
        const double qw = static_cast<double>(qtf) * w;
        query_norm_sq += qw * qw;
        for (const auto& [ordinal, tf] : index.postings.at(term)) {
            dot[ordinal] += qw * static_cast<double>(tf) * w;
        }
    }

    std::vector<double> scores(index.size(), 0.0);
    if (query_norm_sq > 0.0) {
        const double qn = std::sqrt(query_norm_sq);
        for (std::size_t i = 0; i < index.size(); ++i) {
            if (dot[i] != 0.0 && norm_sq[i] > 0.0) {
                scores[i] = dot[i] / (qn * std::sqrt(norm_sq[i]));
            }
        }
    }
    return finish(index, scores);
}

std::vector<ScoredDoc> score_bm25(const SparseIndex& index, const std::string& query,
                                  double k1, double b) {
    const auto n_docs = static_cast<double>(index.size());
    std::vector<double> scores(index.size(), 0.0);

    for (const auto& [term, qtf] : query_counts(query)) {
        auto it = index.df.find(term);
        if (it == index.df.end()) continue;
        const double df = static_cast<double>(it->second);
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const auto& [ordinal, tf] : index.postings.at(term)) {
            const double f = static_cast<double>(tf);
            const double norm_len =
                index.avg_doc_len > 0.0
                    ? static_cast<double>(index.doc_lengths[ordinal]) / index.avg_doc_len
                    : 0.0;
            const double denom = f + k1 * (1.0 - b + b * norm_len);
            scores[ordinal] += static_cast<double>(qtf) * idf * (f * (k1 + 1.0)) / denom;
        }
    }
    return finish(index, scores);
}

std::vector<ScoredDoc> top_n(std::vector<ScoredDoc> scored, std::size_t n) {
    sort_scored(scored);
    if (scored.size() > n) scored.resize(n);
    return scored;
}

std::string corpus_digest(const std::vector<std::pair<std::string, std::string>>& docs) {
    std::uint64_t h = fnv1a64("finrag-corpus-v1");
    for (const auto& [id, text] : docs) {
        h ^= fnv1a64(id);
        h *= 1099511628211ULL;
        h ^= fnv1a64(text);
        h *= 1099511628211ULL;
    }
    return to_hex64(h);
}

void save_index(const SparseIndex& index, const std::filesystem::path& path,
                const std::string& digest) {
    nlohmann::json j;
    j["format"] = "finrag-sparse-index";
    j["version"] = 1;
    j["corpus_digest"] = digest;
    j["doc_ids"] = index.doc_ids;
    j["doc_lengths"] = index.doc_lengths;
    j["avg_doc_len"] = index.avg_doc_len;
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [term, list] : index.postings) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [ordinal, tf] : list) arr.push_back({ordinal, tf});
        postings[term] = std::move(arr);
    }
    j["postings"] = std::move(postings);
    write_file(path, j.dump());
}

SparseIndex load_index(const std::filesystem::path& path, std::string* digest_out) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad index file " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "finrag-sparse-index" || j.value("version", 0) != 1) {
        throw IoError("unrecognised index format in " + path.string());
    }
    SparseIndex index;
    index.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    index.doc_lengths = j.at("doc_lengths").get<std::vector<std::uint32_t>>();
    index.avg_doc_len = j.at("avg_doc_len").get<double>();
    for (const auto& [term, arr] : j.at("postings").items()) {
        auto& list = index.postings[term];
        for (const auto& pair : arr) {
            list.emplace_back(pair.at(0).get<std::uint32_t>(), pair.at(1).get<std::uint32_t>());
        }
        index.df[term] = static_cast<std::uint32_t>(list.size());
    }
    if (digest_out) *digest_out = j.value("corpus_digest", "");
    return index;
}

}  // namespace finrag
