#include "finrag/reader.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "finrag/errors.hpp"
#include "finrag/program.hpp"
#include "finrag/prompts.hpp"
#include "finrag/util.hpp"

namespace finrag {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Embedders
// ---------------------------------------------------------------------------

TextEmbedder TextEmbedder::hashing(std::size_t dim) {
    TextEmbedder embedder;
    embedder.model_id = "hash-" + std::to_string(dim);
    embedder.embed = [dim](const std::vector<std::string>& texts) {
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (const auto& text : texts) out.push_back(hash_embed(text, dim));
        return out;
    };
    return embedder;
}

TextEmbedder TextEmbedder::gateway(ChatClient& client, std::string model_id) {
    TextEmbedder embedder;
    embedder.model_id = model_id;
    embedder.embed = [&client, model_id](const std::vector<std::string>& texts) {
        return client.embed(texts, model_id);
    };
    return embedder;
}

namespace {

std::vector<std::vector<double>> embed_or_raise(const TextEmbedder& embedder,
                                                const std::vector<std::string>& texts) {
    if (!embedder.embed) throw EmbedderUnavailable("no embedding function configured");
    std::vector<std::vector<double>> vectors;
    try {
        vectors = embedder.embed(texts);
    } catch (const BackendError& e) {
        throw EmbedderUnavailable(std::string("embedding backend failed: ") + e.what());
    }
    if (vectors.size() != texts.size()) {
        throw EmbedderUnavailable("embedder returned " + std::to_string(vectors.size()) +
                                  " vectors for " + std::to_string(texts.size()) + " texts");
    }
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size()) {
            throw EmbedderUnavailable("embedder returned mixed dimensions");
        }
    }
    return vectors;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExemplarStore persistence
// ---------------------------------------------------------------------------

ExemplarStore::ExemplarStore(std::vector<Exemplar> exemplars, std::string embedding_model_id)
    : exemplars_(std::move(exemplars)), embedding_model_id_(std::move(embedding_model_id)) {
    for (const auto& e : exemplars_) {
        if (e.reasoning_chain.empty()) {
            throw DataError("exemplar " + e.id + " has an empty reasoning chain");
        }
        if (!e.embedding.empty() && e.embedding.size() != exemplars_.front().embedding.size()) {
            throw DataError("exemplar " + e.id + " embedding dimension differs");
        }
    }
}

void ExemplarStore::save(const std::filesystem::path& path) const {
    std::string lines;
    for (const auto& e : exemplars_) {
        json entry{{"id", e.id},
                   {"question", e.question},
                   {"chain", e.reasoning_chain},
                   {"final_answer", e.final_answer}};
        lines += entry.dump();
        lines += '\n';
    }
    write_file(path, lines);

    std::string matrix = embedding_model_id_;
    matrix += ' ';
    matrix += std::to_string(exemplars_.empty() ? 0 : exemplars_.front().embedding.size());
    matrix += '\n';
    for (const auto& e : exemplars_) {
        for (std::size_t i = 0; i < e.embedding.size(); ++i) {
            if (i != 0) matrix += ' ';
            matrix += format_double(e.embedding[i]);
        }
        matrix += '\n';
    }
    write_file(path.string() + ".emb", matrix);
}

ExemplarStore ExemplarStore::load(const std::filesystem::path& path) {
    std::vector<Exemplar> exemplars;
    for (const auto& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        json entry;
        try {
            entry = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("bad exemplar line in " + path.string() + ": " + e.what());
        }
        Exemplar exemplar;
        exemplar.id = entry.at("id").get<std::string>();
        exemplar.question = entry.at("question").get<std::string>();
        exemplar.reasoning_chain = entry.at("chain").get<std::vector<std::string>>();
        exemplar.final_answer = entry.at("final_answer").get<std::string>();
        exemplars.push_back(std::move(exemplar));
    }

    const std::filesystem::path matrix_path = path.string() + ".emb";
    const std::vector<std::string> matrix_lines = split_lines(read_file(matrix_path));
    if (matrix_lines.empty()) throw IoError("empty embedding matrix " + matrix_path.string());

    const std::string& header = matrix_lines.front();
    const std::size_t space = header.rfind(' ');
    if (space == std::string::npos) throw IoError("bad embedding matrix header");
    const std::string model_id = header.substr(0, space);
    const auto dim = parse_long(header.substr(space + 1));
    if (!dim || *dim < 0) throw IoError("bad embedding matrix dimension");

    std::size_t row = 1;
    for (auto& exemplar : exemplars) {
        if (row >= matrix_lines.size()) throw IoError("embedding matrix has too few rows");
        const std::string& line = matrix_lines[row++];
        std::size_t start = 0;
        while (start < line.size()) {
            std::size_t end = line.find(' ', start);
            if (end == std::string::npos) end = line.size();
            const auto value = parse_double(std::string_view(line).substr(start, end - start));
            if (!value) throw IoError("bad embedding value in matrix row");
            exemplar.embedding.push_back(*value);
            start = end + 1;
        }
        if (exemplar.embedding.size() != static_cast<std::size_t>(*dim)) {
            throw IoError("embedding row width != declared dimension");
        }
    }
    return ExemplarStore(std::move(exemplars), model_id);
}

// ---------------------------------------------------------------------------
// Chain generation & validation
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kAnswerMarker = "so the answer is";

}  // namespace

bool chain_consistent(const std::vector<std::string>& steps, const std::string& program) {
    if (steps.empty()) return false;
    const std::string& last = steps.back();
    if (!contains_ci(last, kAnswerMarker)) return false;

    ProgramResult expected;
    try {
        expected = execute_program(program);
    } catch (const DataError&) {
        return false;
    }

    if (expected.is_boolean) {
        const bool says_yes = contains_word_ci(last, "yes");
        const bool says_no = contains_word_ci(last, "no");
        if (says_yes == says_no) return false;
        return says_yes == expected.truth;
    }

    const auto token = last_numeric_token(last);
    if (!token) return false;
    const auto stated = parse_financial_number(*token);
    if (!stated) return false;
    return rel_close(*stated, expected.value, 0.01);
}

ChainResult generate_reasoning_chain(const QARecord& record, ChatClient& llm,
                                     const std::string& model_id, double temperature) {
    std::string prompt;
    for (const auto& exemplar : prompts::kChainExemplarsV1) {
        prompt += "Question: ";
        prompt += exemplar.question;
        prompt += "\nProgram steps: ";
        prompt += exemplar.program;
        prompt += "\nReasoning:\n";
        prompt += exemplar.chain;
        prompt += "\n\n";
    }
    prompt += "Question: " + record.question + "\nProgram steps: " + record.program +
              "\nReasoning:\n";

    ChatRequest request;
    request.model_id = model_id;
    request.temperature = temperature;
    request.messages = {{"system", std::string(prompts::kChainSystemV1)},
                        {"user", prompt}};
    const std::string completion = llm.chat(request);

    ChainResult result;
    result.steps = parse_numbered_lines(completion);
    if (result.steps.empty()) {
        throw ChainParseFailure("no numbered reasoning steps in completion for " + record.id);
    }
    if (!contains_ci(result.steps.back(), kAnswerMarker)) {
        throw ChainParseFailure("chain for " + record.id + " does not end with an answer line");
    }
    result.consistent = chain_consistent(result.steps, record.program);
    return result;
}

// ---------------------------------------------------------------------------
// Store construction & exemplar selection
// ---------------------------------------------------------------------------

ExemplarStore build_exemplar_store(
    const std::vector<QARecord>& train,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& chains,
    const TextEmbedder& embedder, std::vector<std::string>* excluded) {
    std::vector<Exemplar> exemplars;
    auto reject = [&](const std::string& id, const std::string& why) {
        if (excluded != nullptr) excluded->push_back(id + ": " + why);
    };

    for (const auto& record : train) {
        const auto chain_it =
            std::find_if(chains.begin(), chains.end(),
                         [&](const auto& entry) { return entry.first == record.id; });
        if (chain_it == chains.end()) {
            reject(record.id, "no generated chain");
            continue;
        }
        const std::vector<std::string>& steps = chain_it->second;
        if (steps.empty() || !contains_ci(steps.back(), kAnswerMarker)) {
            reject(record.id, "chain missing final answer line");
            continue;
        }
        if (!chain_consistent(steps, record.program)) {
            reject(record.id, "chain inconsistent with program");
            continue;
        }

        Exemplar exemplar;
        exemplar.id = record.id;
        exemplar.question = record.question;
        exemplar.reasoning_chain = steps;
        const std::string& last = steps.back();
        const std::size_t marker = lower_ascii(last).find(kAnswerMarker);
        std::string tail = trim(std::string_view(last).substr(marker + kAnswerMarker.size()));
        while (!tail.empty() && (tail.back() == '.' || tail.back() == '!')) tail.pop_back();
        exemplar.final_answer = trim(tail);
        exemplars.push_back(std::move(exemplar));
    }

    std::vector<std::string> questions;
    questions.reserve(exemplars.size());
    for (const auto& e : exemplars) questions.push_back(e.question);
    if (!exemplars.empty()) {
        const auto vectors = embed_or_raise(embedder, questions);
        for (std::size_t i = 0; i < exemplars.size(); ++i) exemplars[i].embedding = vectors[i];
    }
    return ExemplarStore(std::move(exemplars), embedder.model_id);
}

std::vector<Exemplar> select_exemplars(const std::string& question, const ExemplarStore& store,
                                       int n, const TextEmbedder& embedder) {
    if (store.empty()) throw DataError("select_exemplars: empty store");
    if (n < 1) throw DataError("select_exemplars: n must be >= 1");
    if (embedder.model_id != store.embedding_model_id()) {
        throw EmbedderUnavailable("embedder model '" + embedder.model_id +
                                  "' does not match store model '" +
                                  store.embedding_model_id() + "'");
    }

    const auto query_vec = embed_or_raise(embedder, {question}).front();

    std::vector<std::pair<double, std::size_t>> ranked;  // (similarity, index)
    ranked.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        ranked.emplace_back(cosine_similarity(query_vec, store.exemplars()[i].embedding), i);
    }
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return store.exemplars()[a.second].id < store.exemplars()[b.second].id;
    });

    std::vector<Exemplar> out;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(n), store.size());
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(store.exemplars()[ranked[i].second]);
    return out;
}

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

std::string to_string(PromptMode mode) {
    switch (mode) {
        case PromptMode::dynamic_nshot: return "dynamic_nshot";
        case PromptMode::static_nshot: return "static_nshot";
        case PromptMode::zero_shot: return "zero_shot";
    }
    return "zero_shot";
}

std::string PromptBundle::serialize() const {
    std::string out = "[prompt v1 mode=" + to_string(mode) + "]\n[system]\n" + system_preamble + "\n";
    out += "[exemplars " + std::to_string(exemplar_blocks.size()) + "]\n";
    for (std::size_t i = 0; i < exemplar_blocks.size(); ++i) {
        out += "[exemplar " + std::to_string(i + 1) + "]\n" + exemplar_blocks[i] + "\n";
    }
    out += "[context]\n" + context_block + "\n[question]\n" + question + "\n[format]\n" +
           format_instruction + "\n";
    return out;
}

std::vector<ChatMessage> PromptBundle::to_messages() const {
    std::string user;
    for (const auto& block : exemplar_blocks) {
        user += block;
        user += "\n\n";
    }
    if (!context_block.empty()) {
        user += "Context:\n";
        user += context_block;
        user += "\n\n";
    }
    user += "Question: " + question + "\n\n" + format_instruction;
    return {{"system", system_preamble}, {"user", user}};
}

PromptBundle build_prompt(const std::string& question, const std::vector<ContextUnit>& contexts,
                          const std::vector<Exemplar>& exemplars, PromptMode mode) {
    if (mode != PromptMode::zero_shot && contexts.empty()) {
        throw DataError("build_prompt: contexts required outside zero-shot mode");
    }

    PromptBundle bundle;
    bundle.mode = mode;
    bundle.system_preamble = std::string(prompts::kAnswerSystemV1);
    bundle.question = question;
    bundle.format_instruction = std::string(prompts::kAnswerFormatV1);

    if (mode != PromptMode::zero_shot) {
        for (const auto& exemplar : exemplars) {
            std::string block = "Example question: " + exemplar.question + "\nReasoning:\n";
            for (std::size_t i = 0; i < exemplar.reasoning_chain.size(); ++i) {
                block += std::to_string(i + 1) + ". " + exemplar.reasoning_chain[i] + "\n";
            }
            block += "Final answer: " + exemplar.final_answer;
            bundle.exemplar_blocks.push_back(std::move(block));
        }
    }

    for (std::size_t i = 0; i < contexts.size(); ++i) {
        if (i != 0) bundle.context_block += '\n';
        bundle.context_block += "- [" + contexts[i].id + "] " + contexts[i].content;
    }
    return bundle;
}

std::string answer(const std::string& question, const std::vector<ContextUnit>& contexts,
                   ChatClient& llm, const ExemplarStore& store, const TextEmbedder& embedder,
                   const AnswerConfig& config) {
    std::vector<Exemplar> exemplars;
    if (config.mode == PromptMode::dynamic_nshot) {
        exemplars = select_exemplars(question, store, config.n, embedder);
    } else if (config.mode == PromptMode::static_nshot) {
        // Fixed list: the store's first n exemplars in insertion order.
        const std::size_t take =
            std::min<std::size_t>(static_cast<std::size_t>(std::max(config.n, 0)),
                                  store.size());
        exemplars.assign(store.exemplars().begin(), store.exemplars().begin() + take);
    }

    const PromptBundle bundle = build_prompt(question, contexts, exemplars, config.mode);
    ChatRequest request;
    request.model_id = config.model_id;
    request.temperature = config.temperature;
    request.max_tokens = config.max_tokens;
    request.messages = bundle.to_messages();
    return llm.chat(request);
}

}  // namespace finrag
