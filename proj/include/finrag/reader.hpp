#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "finrag/corpus.hpp"
#include "finrag/llm_gateway.hpp"

namespace finrag {

// A solved training question: its validated reasoning chain and the question
// embedding used for similarity lookup. The last chain step always begins
// "So the answer is".
struct Exemplar {
    std::string id;  // source record id
    std::string question;
    std::vector<std::string> reasoning_chain;
    std::string final_answer;
    std::vector<double> embedding;
};

// Embedding source for questions; model_id tags vectors so stores and
// queries can never silently mix embedding spaces.
struct TextEmbedder {
    std::string model_id;
    std::function<std::vector<std::vector<double>>(const std::vector<std::string>&)> embed;

    static TextEmbedder hashing(std::size_t dim = 64);  // offline, model id "hash-<dim>"
    static TextEmbedder gateway(ChatClient& client, std::string model_id);
};

class ExemplarStore {
public:
    ExemplarStore() = default;
    ExemplarStore(std::vector<Exemplar> exemplars, std::string embedding_model_id);

    const std::vector<Exemplar>& exemplars() const { return exemplars_; }
    const std::string& embedding_model_id() const { return embedding_model_id_; }
    bool empty() const { return exemplars_.empty(); }
    std::size_t size() const { return exemplars_.size(); }

    // Chains as JSONL at `path`; the embedding matrix beside it at
    // "<path>.emb" (header line "<model_id> <dim>", one row per exemplar).
    void save(const std::filesystem::path& path) const;
    static ExemplarStore load(const std::filesystem::path& path);

private:
    std::vector<Exemplar> exemplars_;
    std::string embedding_model_id_;
};

struct ChainResult {
    std::vector<std::string> steps;
    bool consistent = false;  // final stated value matches the executed program
};

// Prompts the LLM with 5 fixed worked examples plus this record's question
// and program, parses the numbered chain, and checks the final stated value
// against the executed program (relative 0.01).
ChainResult generate_reasoning_chain(const QARecord& record, ChatClient& llm,
                                     const std::string& model_id = "gpt-4",
                                     double temperature = 0.2);

// Offline validation of an already-generated chain against a record's program.
bool chain_consistent(const std::vector<std::string>& steps, const std::string& program);

// Builds the store from train-split records and their generated chains
// (record id -> steps). Records whose chain is missing, malformed, or
// inconsistent with their program are excluded; their ids and reasons land in
// `excluded` when given.
ExemplarStore build_exemplar_store(const std::vector<QARecord>& train,
                                   const std::vector<std::pair<std::string, std::vector<std::string>>>& chains,
                                   const TextEmbedder& embedder,
                                   std::vector<std::string>* excluded = nullptr);

// Top-n by cosine similarity between the question and stored questions, ties
// by exemplar id ascending. The embedder must match the store's model id.
std::vector<Exemplar> select_exemplars(const std::string& question, const ExemplarStore& store,
                                       int n, const TextEmbedder& embedder);

enum class PromptMode { dynamic_nshot, static_nshot, zero_shot };

std::string to_string(PromptMode mode);

struct PromptBundle {
    PromptMode mode = PromptMode::zero_shot;
    std::string system_preamble;
    std::vector<std::string> exemplar_blocks;
    std::string context_block;
    std::string question;
    std::string format_instruction;

    // Deterministic, injective over every field (section markers + counts).
    std::string serialize() const;
    std::vector<ChatMessage> to_messages() const;
};

PromptBundle build_prompt(const std::string& question, const std::vector<ContextUnit>& contexts,
                          const std::vector<Exemplar>& exemplars, PromptMode mode);

struct AnswerConfig {
    PromptMode mode = PromptMode::dynamic_nshot;
    int n = 3;  // exemplar count for the *_nshot modes
    std::string model_id = "gpt-4";
    double temperature = 0.2;
    int max_tokens = 1024;
};

// End of the pipeline: pick exemplars (mode-dependent), build the prompt,
// and return the raw completion untouched for the evaluation harness.
std::string answer(const std::string& question, const std::vector<ContextUnit>& contexts,
                   ChatClient& llm, const ExemplarStore& store, const TextEmbedder& embedder,
                   const AnswerConfig& config = {});

}  // namespace finrag
