// Command-line entry point: ingest, index, query, evaluate, mine-negatives,
// gen-chains. Configuration file plus flag overrides (flags win); exit codes
// 0 success, 1 usage, 2 data error, 3 backend error.

#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
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

namespace {

using nlohmann::json;
using namespace finrag;

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct LlmOptions {
    std::string mode = "replay";  // live | replay | record
    std::string fixtures;         // replay store path
    std::string answer_model = "gpt-4";
    std::string decompose_model = "gpt-3.5-turbo";
    double temperature = 0.2;
};

struct ScorerOptions {
    std::string name = "tfidf";  // tfidf | bm25 | embedding | remote
    std::string endpoint;
    std::string token;
};

// Owns whichever client chain the --llm mode requires and flushes recordings
// on destruction.
struct LlmHandle {
    ReplayStore store;
    std::unique_ptr<ChatClient> live;
    std::unique_ptr<ChatClient> client;
    std::optional<std::filesystem::path> save_path;

    ChatClient& get() { return *client; }

    ~LlmHandle() {
        if (save_path) {
            try {
                store.save(*save_path);
            } catch (const Error&) {
                // destructor: nothing sensible left to do
            }
        }
    }
};

std::unique_ptr<LlmHandle> make_llm(const LlmOptions& options) {
    auto handle = std::make_unique<LlmHandle>();
    if (options.mode == "replay") {
        if (options.fixtures.empty()) throw DataError("--fixtures is required in replay mode");
        handle->client = std::make_unique<ReplayClient>(ReplayStore::load(options.fixtures));
        return handle;
    }
    if (options.mode == "live") {
        handle->client = std::make_unique<LiveClient>(LiveConfig::from_env());
        return handle;
    }
    if (options.mode == "record") {
        if (options.fixtures.empty()) throw DataError("--fixtures is required in record mode");
        if (std::filesystem::exists(options.fixtures)) {
            handle->store = ReplayStore::load(options.fixtures);
        }
        handle->live = std::make_unique<LiveClient>(LiveConfig::from_env());
        handle->client = std::make_unique<RecordingClient>(*handle->live, handle->store);
        handle->save_path = options.fixtures;
        return handle;
    }
    throw DataError("unknown --llm mode '" + options.mode + "' (live|replay|record)");
}

std::shared_ptr<RelevanceScorer> make_scorer(const ScorerOptions& options) {
    if (options.name == "tfidf") return std::make_shared<LexicalTfidfScorer>();
    if (options.name == "bm25") return std::make_shared<LexicalBm25Scorer>();
    if (options.name == "embedding") return EmbeddingCosineScorer::hashing(64);
    if (options.name == "remote") {
        if (options.endpoint.empty()) {
            throw DataError("--scorer-endpoint is required for the remote scorer");
        }
        RemoteCrossEncoderScorer::Config config;
        config.endpoint_url = options.endpoint;
        config.auth_token = options.token;
        return std::make_shared<RemoteCrossEncoderScorer>(config);
    }
    throw DataError("unknown --scorer '" + options.name + "' (tfidf|bm25|embedding|remote)");
}

TextEmbedder make_embedder(const std::string& spec, ChatClient& llm) {
    if (spec.rfind("hash-", 0) == 0) {
        const auto dim = parse_long(spec.substr(5));
        if (!dim || *dim < 8) throw DataError("bad hash embedder spec '" + spec + "'");
        return TextEmbedder::hashing(static_cast<std::size_t>(*dim));
    }
    return TextEmbedder::gateway(llm, spec);
}

PromptMode prompt_mode_from_name(const std::string& name) {
    if (name == "dynamic") return PromptMode::dynamic_nshot;
    if (name == "static") return PromptMode::static_nshot;
    if (name == "zero") return PromptMode::zero_shot;
    throw DataError("unknown --prompt-mode '" + name + "' (dynamic|static|zero)");
}

ExemplarStore load_exemplars_if(const std::string& path, PromptMode mode) {
    if (path.empty()) {
        if (mode != PromptMode::zero_shot) {
            throw DataError("--exemplars is required outside zero-shot prompting");
        }
        return ExemplarStore{};
    }
    return ExemplarStore::load(path);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    write_file(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_ingest(const std::string& reports_dir, const std::string& tickers,
               const std::string& out_path) {
    Gazetteer gazetteer = Gazetteer::builtin();
    if (!tickers.empty()) gazetteer.merge(Gazetteer::from_file(tickers));
    const ReportStore store = load_reports(reports_dir, gazetteer);
    if (store.reports().empty()) throw DataError("no report files in " + reports_dir);

    std::size_t units = 0;
    std::vector<std::pair<std::string, std::string>> docs;
    for (const auto& report : store.reports()) {
        units += report_context_units(report).size();
        for (const auto& page : report.pages) {
            docs.emplace_back(page_id(report.ticker, report.fiscal_year, page.page_no),
                              page.text);
        }
    }

    json summary{{"reports", store.reports().size()},
                 {"pages", store.page_count()},
                 {"units", units},
                 {"digest", corpus_digest(docs)},
                 {"source", reports_dir}};
    std::cout << store.reports().size() << " report" << (store.reports().size() == 1 ? "" : "s")
              << ", " << store.page_count() << " page" << (store.page_count() == 1 ? "" : "s")
              << ", " << units << " unit" << (units == 1 ? "" : "s") << "\n";
    if (!out_path.empty()) write_text(out_path, summary.dump(2) + "\n");
    return 0;
}

int cmd_index(const std::string& reports_dir, const std::string& tickers,
              const std::string& out_dir) {
    Gazetteer gazetteer = Gazetteer::builtin();
    if (!tickers.empty()) gazetteer.merge(Gazetteer::from_file(tickers));
    const ReportStore store = load_reports(reports_dir, gazetteer);
    if (store.reports().empty()) throw DataError("no report files in " + reports_dir);

    std::filesystem::create_directories(out_dir);
    json manifest = json::array();
    for (const auto& report : store.reports()) {
        const SparseIndex index = build_page_index(report);
        std::vector<std::pair<std::string, std::string>> docs;
        for (const auto& page : report.pages) {
            docs.emplace_back(page_id(report.ticker, report.fiscal_year, page.page_no),
                              page.text);
        }
        const std::string digest = corpus_digest(docs);
        const std::string name =
            report.ticker + "_" + std::to_string(report.fiscal_year) + ".index.json";
        save_index(index, std::filesystem::path(out_dir) / name, digest);
        manifest.push_back(json{{"report", report.ticker},
                                {"fiscal_year", report.fiscal_year},
                                {"file", name},
                                {"digest", digest}});
    }
    write_text(std::filesystem::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "indexed " << store.reports().size() << " reports\n";
    return 0;
}

struct EvalCliOptions {
    std::string mode = "modular";
    std::string reports_dir;
    std::string tickers;
    std::string dataset;
    std::string exemplars;
    std::string embedder = "hash-64";
    std::string retriever = "tfidf";
    std::string prompt_mode = "dynamic";
    int pages_n = 8;
    int contexts_k = -1;  // -1: 3 for modular, 5 for e2e
    int shots = 3;
    int threads = 4;
    std::string out_dir;
    LlmOptions llm;
    ScorerOptions scorer;
};

EvalReport run_eval_from_options(const EvalCliOptions& options) {
    Gazetteer gazetteer = Gazetteer::builtin();
    if (!options.tickers.empty()) gazetteer.merge(Gazetteer::from_file(options.tickers));
    const ReportStore store = load_reports(options.reports_dir, gazetteer);
    const std::vector<QARecord> dataset = load_finqa(options.dataset);

    auto llm = make_llm(options.llm);
    auto scorer = make_scorer(options.scorer);
    const PromptMode prompt_mode = prompt_mode_from_name(options.prompt_mode);
    const ExemplarStore exemplars = load_exemplars_if(options.exemplars, prompt_mode);
    const TextEmbedder embedder = make_embedder(options.embedder, llm->get());

    EvalConfig config;
    config.retrieval = retrieval_method_from_name(options.retriever);
    config.pages_n = options.pages_n;
    config.contexts_k = options.contexts_k > 0 ? options.contexts_k
                                               : (options.mode == "modular" ? 3 : 5);
    config.prompt_mode = prompt_mode;
    config.shots = options.shots;
    config.answer_model_id = options.llm.answer_model;
    config.decompose_model_id = options.llm.decompose_model;
    config.temperature = options.llm.temperature;
    config.threads = options.threads;

    if (options.mode == "modular") {
        return run_modular_eval(dataset, store, *scorer, llm->get(), exemplars, embedder,
                                config);
    }
    if (options.mode == "e2e") {
        return run_e2e_eval(dataset, store, *scorer, llm->get(), exemplars, embedder, config);
    }
    throw DataError("unknown --mode '" + options.mode + "' (modular|e2e)");
}

int cmd_evaluate(const EvalCliOptions& options) {
    const EvalReport report = run_eval_from_options(options);

    std::cout << report.to_table();
    std::vector<std::string> missing;
    for (const auto& result : report.results) {
        if (result.failure.find("no recorded completion for digest") != std::string::npos) {
            missing.push_back(result.id + ": " + result.failure);
        }
    }
    if (!missing.empty()) {
        std::cout << "\nmissing replay fixtures:\n";
        for (const auto& line : missing) std::cout << "  " << line << "\n";
    }

    if (!options.out_dir.empty()) {
        std::filesystem::create_directories(options.out_dir);
        const std::filesystem::path dir(options.out_dir);
        write_text(dir / "report.json", report.to_json());
        write_text(dir / "report.txt", report.to_table());
        write_text(dir / "predictions.jsonl", report.predictions_jsonl());
    }
    return 0;
}

struct QueryCliOptions {
    std::string reports_dir;
    std::string tickers;
    std::string question;
    std::string exemplars;
    std::string embedder = "hash-64";
    std::string retriever = "tfidf";
    std::string prompt_mode = "dynamic";
    int pages_n = 8;
    int contexts_k = 5;
    int shots = 3;
    std::string gold_answer;
    std::string gold_exe;
    bool as_json = false;
    LlmOptions llm;
    ScorerOptions scorer;
};

int cmd_query(const QueryCliOptions& options) {
    Gazetteer gazetteer = Gazetteer::builtin();
    if (!options.tickers.empty()) gazetteer.merge(Gazetteer::from_file(options.tickers));
    const ReportStore store = load_reports(options.reports_dir, gazetteer);

    QARecord record;
    record.id = "cli-query";
    record.question = options.question;
    record.answer = options.gold_answer;
    record.exe_answer = options.gold_exe;

    auto llm = make_llm(options.llm);
    auto scorer = make_scorer(options.scorer);
    const PromptMode prompt_mode = prompt_mode_from_name(options.prompt_mode);
    const ExemplarStore exemplars = load_exemplars_if(options.exemplars, prompt_mode);
    const TextEmbedder embedder = make_embedder(options.embedder, llm->get());

    EvalConfig config;
    config.retrieval = retrieval_method_from_name(options.retriever);
    config.pages_n = options.pages_n;
    config.contexts_k = options.contexts_k;
    config.prompt_mode = prompt_mode;
    config.shots = options.shots;
    config.answer_model_id = options.llm.answer_model;
    config.decompose_model_id = options.llm.decompose_model;
    config.temperature = options.llm.temperature;
    config.augment_questions = false;  // no gold metadata to augment from
    config.threads = 1;

    const EvalReport report =
        run_e2e_eval({record}, store, *scorer, llm->get(), exemplars, embedder, config);
    const QuestionResult& result = report.results.front();
    if (!result.failure.empty()) {
        // Surface the stage error with the right exit code.
        if (result.failure_is_backend) throw LlmUnavailable(result.failure);
        throw DataError(result.failure);
    }

    const bool have_gold = !options.gold_answer.empty() || !options.gold_exe.empty();
    if (options.as_json) {
        json out{{"question", result.question},
                 {"sub_queries", result.sub_queries},
                 {"pages", result.retrieved_pages},
                 {"contexts", std::vector<std::string>(
                                  result.retrieved_contexts.begin(),
                                  result.retrieved_contexts.begin() +
                                      std::min<std::size_t>(result.retrieved_contexts.size(),
                                                            static_cast<std::size_t>(
                                                                options.contexts_k)))},
                 {"generation", result.generation},
                 {"answer", result.prediction}};
        if (have_gold) {
            out["correct"] = result.verdict.correct;
            out["matched_via"] = to_string(result.verdict.matched_via);
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    std::cout << "question: " << result.question << "\n";
    for (std::size_t i = 0; i < result.sub_queries.size(); ++i) {
        std::cout << "  sub-query " << (i + 1) << ": " << result.sub_queries[i] << "\n";
    }
    std::cout << "pages:\n";
    for (std::size_t i = 0; i < result.retrieved_pages.size() &&
                            i < static_cast<std::size_t>(options.pages_n); ++i) {
        std::cout << "  " << result.retrieved_pages[i] << "\n";
    }
    std::cout << "contexts:\n";
    for (std::size_t i = 0; i < result.retrieved_contexts.size() &&
                            i < static_cast<std::size_t>(options.contexts_k); ++i) {
        std::cout << "  " << result.retrieved_contexts[i] << "\n";
    }
    std::cout << "answer: " << result.prediction << "\n";
    if (have_gold) {
        std::cout << "verdict: " << (result.verdict.correct ? "correct" : "incorrect") << " ("
                  << to_string(result.verdict.matched_via) << ")\n";
    }
    return 0;
}

struct MineCliOptions {
    std::string reports_dir;
    std::string tickers;
    std::string dataset;
    std::string strategy = "cluster";
    int k = 1;
    int count = 1;
    std::uint64_t seed = 7;
    std::string scorer = "tfidf";
    std::string out = "training_pairs.jsonl";
};

int cmd_mine(const MineCliOptions& options) {
    Gazetteer gazetteer = Gazetteer::builtin();
    if (!options.tickers.empty()) gazetteer.merge(Gazetteer::from_file(options.tickers));
    const ReportStore store = load_reports(options.reports_dir, gazetteer);
    const std::vector<QARecord> dataset = load_finqa(options.dataset);

    const MiningScorers scorers = MiningScorers::offline();
    auto self_scorer = make_scorer(ScorerOptions{options.scorer, "", ""});

    std::vector<TrainingPair> all_pairs;
    std::vector<std::string> issues;
    std::size_t mined_queries = 0;

    for (const auto& record : dataset) {
        const GoldPageRef& gold = record.gold_page;
        const Report* report = gold.resolved ? store.find(gold.ticker, gold.fiscal_year) : nullptr;
        const Page* page = nullptr;
        if (report != nullptr) {
            for (const auto& candidate : report->pages) {
                if (candidate.page_no == gold.page_no) page = &candidate;
            }
        }
        if (page == nullptr) {
            issues.push_back(record.id + ": gold page not in store");
            continue;
        }
        if (record.gold_context_ids.empty()) {
            issues.push_back(record.id + ": no gold context ids");
            continue;
        }

        const SourceRef source{gold.ticker, gold.fiscal_year, gold.page_no};
        const std::vector<ContextUnit> candidates = extract_context_units(*page, source);
        try {
            std::vector<TrainingPair> pairs;
            if (options.strategy == "cluster") {
                pairs = mine_cluster_negatives(record.question, record.gold_context_ids,
                                               candidates, scorers, options.k);
            } else if (options.strategy == "random") {
                pairs = mine_random_negatives(record.question, record.gold_context_ids,
                                              candidates, options.count, options.seed);
            } else if (options.strategy == "self") {
                pairs = mine_self_negatives(record.question, record.gold_context_ids,
                                            candidates, *self_scorer, options.count);
            } else {
                throw DataError("unknown --strategy '" + options.strategy +
                                "' (cluster|random|self)");
            }
            all_pairs.insert(all_pairs.end(), pairs.begin(), pairs.end());
            ++mined_queries;
        } catch (const NoNegativeCandidates& e) {
            issues.push_back(record.id + ": " + e.what());
        } catch (const DataError& e) {
            if (options.strategy == "cluster" || options.strategy == "random" ||
                options.strategy == "self") {
                issues.push_back(record.id + ": " + e.what());
            } else {
                throw;
            }
        }
    }

    const std::size_t written = export_training_set(all_pairs, options.out);
    std::size_t positives = 0;
    for (const auto& pair : all_pairs) {
        if (pair.label == PairLabel::positive) ++positives;
    }
    std::cout << "strategy " << options.strategy << ": " << mined_queries << " queries, "
              << positives << " positives, " << (written - positives) << " negatives, "
              << written << " lines -> " << options.out << "\n";
    for (const auto& issue : issues) std::cout << "  skipped " << issue << "\n";

    json meta{{"strategy", options.strategy}, {"k", options.k},
              {"count", options.count},      {"seed", options.seed},
              {"dataset", options.dataset},  {"queries_mined", mined_queries},
              {"lines", written}};
    write_text(options.out + ".meta.json", meta.dump(2) + "\n");
    return 0;
}

struct ChainsCliOptions {
    std::string dataset;
    std::string out = "chains.jsonl";
    LlmOptions llm;
};

int cmd_gen_chains(const ChainsCliOptions& options) {
    const std::vector<QARecord> dataset = load_finqa(options.dataset);
    auto llm = make_llm(options.llm);

    std::string lines;
    std::size_t generated = 0, consistent = 0, skipped = 0;
    for (const auto& record : dataset) {
        if (!record.program_parseable) {
            ++skipped;
            std::cout << "  skipped " << record.id << ": unparseable program\n";
            continue;
        }
        try {
            const ChainResult chain = generate_reasoning_chain(
                record, llm->get(), options.llm.answer_model, options.llm.temperature);
            json line{{"id", record.id},
                      {"question", record.question},
                      {"steps", chain.steps},
                      {"consistent", chain.consistent}};
            lines += line.dump();
            lines += '\n';
            ++generated;
            if (chain.consistent) ++consistent;
        } catch (const ChainParseFailure& e) {
            ++skipped;
            std::cout << "  skipped " << record.id << ": " << e.what() << "\n";
        }
    }
    write_text(options.out, lines);
    std::cout << "chains: " << generated << " generated, " << consistent << " consistent, "
              << skipped << " skipped\n";
    return 0;
}

// ---------------------------------------------------------------------------
// Wiring
// ---------------------------------------------------------------------------

void add_llm_options(CLI::App* cmd, LlmOptions& options) {
    cmd->add_option("--llm", options.mode, "LLM mode: live|replay|record")
        ->capture_default_str();
    cmd->add_option("--fixtures", options.fixtures, "Replay fixture JSONL path");
    cmd->add_option("--model", options.answer_model, "Answer model id")->capture_default_str();
    cmd->add_option("--decompose-model", options.decompose_model, "Decomposition model id")
        ->capture_default_str();
    cmd->add_option("--temperature", options.temperature, "Sampling temperature")
        ->capture_default_str();
}

void add_scorer_options(CLI::App* cmd, ScorerOptions& options) {
    cmd->add_option("--scorer", options.name, "Context scorer: tfidf|bm25|embedding|remote")
        ->capture_default_str();
    cmd->add_option("--scorer-endpoint", options.endpoint, "Remote cross-encoder URL");
    cmd->add_option("--scorer-token", options.token, "Remote cross-encoder bearer token");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retrieval-augmented financial question answering"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from a TOML/INI file (flags win)");

    // ingest
    std::string ingest_reports, ingest_tickers, ingest_out = "corpus_summary.json";
    CLI::App* ingest = app.add_subcommand("ingest", "Load and validate a report corpus");
    ingest->add_option("--reports", ingest_reports, "Directory of report JSON files")
        ->required();
    ingest->add_option("--tickers", ingest_tickers, "Extra ticker->name JSON map");
    ingest->add_option("--out", ingest_out, "Summary output path")->capture_default_str();

    // index
    std::string index_reports, index_tickers, index_out = "indexes";
    CLI::App* index = app.add_subcommand("index", "Build and persist page indexes");
    index->add_option("--reports", index_reports, "Directory of report JSON files")->required();
    index->add_option("--tickers", index_tickers, "Extra ticker->name JSON map");
    index->add_option("--out", index_out, "Output directory")->capture_default_str();

    // query
    QueryCliOptions query_options;
    CLI::App* query = app.add_subcommand("query", "Answer one question end to end");
    query->add_option("--reports", query_options.reports_dir, "Report corpus directory")
        ->required();
    query->add_option("--tickers", query_options.tickers, "Extra ticker->name JSON map");
    query->add_option("--question", query_options.question, "The question")->required();
    query->add_option("--exemplars", query_options.exemplars, "Exemplar store path");
    query->add_option("--embedder", query_options.embedder, "hash-<dim> or embedding model id")
        ->capture_default_str();
    query->add_option("--retriever", query_options.retriever, "Page retriever: tfidf|bm25")
        ->capture_default_str();
    query->add_option("--prompt-mode", query_options.prompt_mode, "dynamic|static|zero")
        ->capture_default_str();
    query->add_option("--pages", query_options.pages_n, "Pages kept after merge")
        ->capture_default_str();
    query->add_option("--contexts", query_options.contexts_k, "Contexts passed to the LLM")
        ->capture_default_str();
    query->add_option("--shots", query_options.shots, "Exemplar count")->capture_default_str();
    query->add_option("--gold-answer", query_options.gold_answer, "Gold answer for a verdict");
    query->add_option("--gold-exe", query_options.gold_exe, "Gold execution answer");
    query->add_flag("--json", query_options.as_json, "Machine-readable output");
    add_llm_options(query, query_options.llm);
    add_scorer_options(query, query_options.scorer);

    // evaluate
    EvalCliOptions eval_options;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Run the evaluation protocol");
    evaluate->add_option("--mode", eval_options.mode, "modular|e2e")->capture_default_str();
    evaluate->add_option("--reports", eval_options.reports_dir, "Report corpus directory")
        ->required();
    evaluate->add_option("--tickers", eval_options.tickers, "Extra ticker->name JSON map");
    evaluate->add_option("--dataset", eval_options.dataset, "QA dataset JSON")->required();
    evaluate->add_option("--exemplars", eval_options.exemplars, "Exemplar store path");
    evaluate->add_option("--embedder", eval_options.embedder, "hash-<dim> or model id")
        ->capture_default_str();
    evaluate->add_option("--retriever", eval_options.retriever, "tfidf|bm25")
        ->capture_default_str();
    evaluate->add_option("--prompt-mode", eval_options.prompt_mode, "dynamic|static|zero")
        ->capture_default_str();
    evaluate->add_option("--pages", eval_options.pages_n, "Pages kept after merge")
        ->capture_default_str();
    evaluate->add_option("--contexts", eval_options.contexts_k,
                         "Contexts passed to the LLM (default 3 modular / 5 e2e)");
    evaluate->add_option("--shots", eval_options.shots, "Exemplar count")->capture_default_str();
    evaluate->add_option("--threads", eval_options.threads, "Worker threads")
        ->capture_default_str();
    evaluate->add_option("--out-dir", eval_options.out_dir, "Write report files here");
    add_llm_options(evaluate, eval_options.llm);
    add_scorer_options(evaluate, eval_options.scorer);

    // mine-negatives
    MineCliOptions mine_options;
    CLI::App* mine = app.add_subcommand("mine-negatives", "Export a training-pair set");
    mine->add_option("--reports", mine_options.reports_dir, "Report corpus directory")
        ->required();
    mine->add_option("--tickers", mine_options.tickers, "Extra ticker->name JSON map");
    mine->add_option("--dataset", mine_options.dataset, "QA dataset JSON")->required();
    mine->add_option("--strategy", mine_options.strategy, "cluster|random|self")
        ->capture_default_str();
    mine->add_option("--k", mine_options.k, "Negatives per positive (cluster)")
        ->capture_default_str();
    mine->add_option("--count", mine_options.count, "Negatives per query (random/self)")
        ->capture_default_str();
    mine->add_option("--seed", mine_options.seed, "Random strategy seed")->capture_default_str();
    mine->add_option("--self-scorer", mine_options.scorer, "Scorer for self strategy")
        ->capture_default_str();
    mine->add_option("--out", mine_options.out, "Output JSONL path")->capture_default_str();

    // gen-chains
    ChainsCliOptions chains_options;
    CLI::App* chains = app.add_subcommand("gen-chains", "Generate reasoning chains");
    chains->add_option("--dataset", chains_options.dataset, "QA dataset JSON")->required();
    chains->add_option("--out", chains_options.out, "Output JSONL path")->capture_default_str();
    add_llm_options(chains, chains_options.llm);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(ingest_reports, ingest_tickers, ingest_out);
        if (app.got_subcommand(index)) return cmd_index(index_reports, index_tickers, index_out);
        if (app.got_subcommand(query)) return cmd_query(query_options);
        if (app.got_subcommand(evaluate)) return cmd_evaluate(eval_options);
        if (app.got_subcommand(mine)) return cmd_mine(mine_options);
        if (app.got_subcommand(chains)) return cmd_gen_chains(chains_options);
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
