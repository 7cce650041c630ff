// Regenerates the committed LLM fixtures under tests/fixtures: reasoning
// chains (chains.jsonl), the exemplar store (exemplars.jsonl + .emb), and the
// replay transcript (replay.jsonl) that the test suite loads. Completions come
// from the scripted backend defined by script.json, recorded through the same
// record/replay machinery the live gateway uses, so every digest in the
// transcript matches a request the pipeline actually issues.
//
// Usage: gen_fixtures [fixtures_dir]   (default: tests/fixtures)

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "finrag/context_rank.hpp"
#include "finrag/corpus.hpp"
#include "finrag/errors.hpp"
#include "finrag/eval.hpp"
#include "finrag/llm_gateway.hpp"
#include "finrag/primary.hpp"
#include "finrag/reader.hpp"
#include "finrag/util.hpp"

namespace {

using nlohmann::json;
using namespace finrag;

// Deterministic stand-in for a live model. Keys every reply off the question
// in the prompt; the prompt template section that follows the question tells
// it which kind of call this is.
class ScriptedBackend final : public ChatClient {
public:
    explicit ScriptedBackend(const json& script) {
        if (script.contains("decompositions")) {
            for (const auto& [question, subs] : script["decompositions"].items()) {
                decompositions_[question] = subs.get<std::vector<std::string>>();
            }
        }
        if (script.contains("answers")) {
            for (const auto& [question, reply] : script["answers"].items()) {
                answers_[question] = reply.get<std::string>();
            }
        }
        if (script.contains("chains")) {
            for (const auto& [question, chain] : script["chains"].items()) {
                chains_[question] = chain.get<std::string>();
            }
        }
    }

    std::string chat(const ChatRequest& request) override {
        const std::string& content = request.messages.back().content;
        const auto last_question = content.rfind("Question: ");
        if (last_question == std::string::npos) {
            throw DataError("scripted backend: prompt carries no question");
        }
        const std::string tail = content.substr(last_question + 10);

        if (const auto cut = tail.find("\nDecomposition:"); cut != std::string::npos) {
            const std::string question = tail.substr(0, cut);
            std::vector<std::string> subs{question};
            if (const auto it = decompositions_.find(question); it != decompositions_.end()) {
                subs = it->second;
            }
            std::string out;
            for (std::size_t i = 0; i < subs.size(); ++i) {
                out += std::to_string(i + 1) + ". " + subs[i] + "\n";
            }
            return out;
        }

        if (const auto cut = tail.find("\nProgram steps:"); cut != std::string::npos) {
            const std::string question = tail.substr(0, cut);
            const auto it = chains_.find(question);
            if (it == chains_.end()) {
                throw DataError("scripted backend: no chain for question: " + question);
            }
            return it->second;
        }

        const auto cut = tail.find("\n\n");
        const std::string question =
            cut == std::string::npos ? std::string(trim(tail)) : tail.substr(0, cut);
        if (const auto it = answers_.find(question); it != answers_.end()) return it->second;
        return "{\"answer\": \"insufficient_context\"}";
    }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                           const std::string&) override {
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (const auto& text : texts) out.push_back(hash_embed(text, 64));
        return out;
    }

private:
    std::map<std::string, std::vector<std::string>> decompositions_;
    std::map<std::string, std::string> answers_;
    std::map<std::string, std::string> chains_;
};

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "tests/fixtures";
    try {
        ScriptedBackend backend(json::parse(read_file(dir / "script.json")));
        ReplayStore transcript;
        RecordingClient llm(backend, transcript);

        const ReportStore reports = load_reports(dir / "reports");
        const std::vector<QARecord> train = load_finqa(dir / "train.json");
        const std::vector<QARecord> test = load_finqa(dir / "test.json");

        // 1. Reasoning chains for the train split.
        std::string chain_lines;
        std::vector<std::pair<std::string, std::vector<std::string>>> chains;
        for (const QARecord& record : train) {
            const ChainResult chain = generate_reasoning_chain(record, llm);
            chains.emplace_back(record.id, chain.steps);
            chain_lines += json{{"id", record.id},
                                {"question", record.question},
                                {"steps", chain.steps},
                                {"consistent", chain.consistent}}
                               .dump();
            chain_lines += '\n';
        }
        write_file(dir / "chains.jsonl", chain_lines);

        // 2. Exemplar store from the consistent chains.
        const TextEmbedder embedder = TextEmbedder::hashing(64);
        std::vector<std::string> excluded;
        const ExemplarStore exemplars = build_exemplar_store(train, chains, embedder, &excluded);
        exemplars.save(dir / "exemplars.jsonl");
        for (const auto& reason : excluded) std::cout << "excluded " << reason << "\n";

        // 3. Both evaluation protocols over the test split (records every
        //    decomposition and answer completion the suite replays).
        LexicalTfidfScorer scorer;
        EvalConfig modular;
        modular.contexts_k = 3;
        const EvalReport modular_report =
            run_modular_eval(test, reports, scorer, llm, exemplars, embedder, modular);

        EvalConfig e2e;
        e2e.pages_n = 8;
        e2e.contexts_k = 5;
        const EvalReport e2e_report =
            run_e2e_eval(test, reports, scorer, llm, exemplars, embedder, e2e);

        // 4. Standalone decomposition golden.
        decompose_query(
            "What is the percentage change in the fair value of the options for Apple "
            "from 2009 to 2010?",
            llm);

        transcript.save(dir / "replay.jsonl");
        std::cout << "replay entries: " << transcript.size() << "\n";
        std::cout << "modular accuracy: " << modular_report.accuracy << " ("
                  << modular_report.correct << "/" << modular_report.total << ")\n";
        std::cout << "e2e accuracy: " << e2e_report.accuracy << " (" << e2e_report.correct
                  << "/" << e2e_report.total << ")\n";
        std::cout << e2e_report.to_table();
        return 0;
    } catch (const Error& e) {
        std::cerr << "fixture generation failed: " << e.what() << "\n";
        return 2;
    }
}
