#include "finrag/llm_gateway.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <random>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "finrag/errors.hpp"
#include "finrag/sparse_index.hpp"
#include "finrag/util.hpp"

namespace finrag {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Canonical serialization & digests
// ---------------------------------------------------------------------------

std::string canonical_request(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back(json{{"content", m.content}, {"role", m.role}});
    }
    // nlohmann orders object keys lexicographically, which is exactly the
    // canonical form the digest is defined over.
    json canon{{"max_tokens", request.max_tokens},
               {"messages", std::move(messages)},
               {"model", request.model_id},
               {"temperature", request.temperature}};
    return canon.dump();
}

std::string canonical_request(const EmbedRequest& request) {
    json canon{{"input", request.texts}, {"kind", "embed"}, {"model", request.model_id}};
    return canon.dump();
}

std::string request_digest(const ChatRequest& request) {
    return to_hex64(fnv1a64(canonical_request(request)));
}

std::string request_digest(const EmbedRequest& request) {
    return to_hex64(fnv1a64(canonical_request(request)));
}

// ---------------------------------------------------------------------------
// Default transport (cpp-httplib)
// ---------------------------------------------------------------------------

namespace {

// "http://host:port/some/path" -> {"http://host:port", "/some/path"}
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    auto path_start = scheme_end == std::string::npos
                          ? url.find('/')
                          : url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
public:
    HttpResult post(const std::string& url, const std::string& bearer_token,
                    const std::string& json_body) override {
        auto [origin, path] = split_url(url);
        httplib::Client client(origin);
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!bearer_token.empty()) {
            headers.emplace("Authorization", "Bearer " + bearer_token);
        }
        auto res = client.Post(path, headers, json_body, "application/json");
        if (!res) return HttpResult{0, ""};
        return HttpResult{res->status, res->body};
    }
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport() {
    return std::make_shared<HttplibTransport>();
}

// ---------------------------------------------------------------------------
// ReplayStore
// ---------------------------------------------------------------------------

ReplayStore ReplayStore::load(const std::filesystem::path& path) {
    ReplayStore store;
    const std::string text = read_file(path);
    for (const auto& line : split_lines(text)) {
        if (trim(line).empty()) continue;
        json entry;
        try {
            entry = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("bad replay fixture line in " + path.string() + ": " + e.what());
        }
        if (!entry.contains("digest") || !entry.contains("response")) {
            throw IoError("replay fixture line missing digest/response in " + path.string());
        }
        store.put(entry.at("digest").get<std::string>(),
                  entry.at("response").get<std::string>());
    }
    return store;
}

void ReplayStore::save(const std::filesystem::path& path) const {
    std::lock_guard lock(mutex_);
    std::string out;
    for (const auto& digest : insertion_order_) {
        json entry{{"digest", digest}, {"response", responses_.at(digest)}};
        out += entry.dump();
        out += '\n';
    }
    write_file(path, out);
}

std::optional<std::string> ReplayStore::find(const std::string& digest) const {
    // Replay is read-only: no lock on the hot path.
    auto it = responses_.find(digest);
    if (it == responses_.end()) return std::nullopt;
    return it->second;
}

void ReplayStore::put(const std::string& digest, const std::string& response) {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = responses_.emplace(digest, response);
    if (inserted) {
        insertion_order_.push_back(digest);
    } else {
        it->second = response;
    }
}

std::size_t ReplayStore::size() const {
    std::lock_guard lock(mutex_);
    return responses_.size();
}

ReplayStore::ReplayStore(const ReplayStore& other) {
    std::lock_guard lock(other.mutex_);
    responses_ = other.responses_;
    insertion_order_ = other.insertion_order_;
}

ReplayStore& ReplayStore::operator=(const ReplayStore& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    responses_ = other.responses_;
    insertion_order_ = other.insertion_order_;
    return *this;
}

ReplayStore::ReplayStore(ReplayStore&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    responses_ = std::move(other.responses_);
    insertion_order_ = std::move(other.insertion_order_);
}

ReplayStore& ReplayStore::operator=(ReplayStore&& other) noexcept {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    responses_ = std::move(other.responses_);
    insertion_order_ = std::move(other.insertion_order_);
    return *this;
}

// ---------------------------------------------------------------------------
// LiveClient
// ---------------------------------------------------------------------------

class InFlightGate {
public:
    explicit InFlightGate(int limit) : available_(limit > 0 ? limit : 1) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

namespace {

struct GateSlot {
    explicit GateSlot(InFlightGate& gate) : gate_(gate) { gate_.acquire(); }
    ~GateSlot() { gate_.release(); }
    GateSlot(const GateSlot&) = delete;
    GateSlot& operator=(const GateSlot&) = delete;
    InFlightGate& gate_;
};

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value != nullptr ? std::string(value) : fallback;
}

}  // namespace

LiveConfig LiveConfig::from_env() {
    LiveConfig config;
    config.base_url = env_or("LLM_BASE_URL", "http://localhost:8000/v1");
    config.embed_base_url = env_or("EMBED_BASE_URL", "");
    config.api_key = env_or("LLM_API_KEY", "");
    return config;
}

LiveClient::LiveClient(LiveConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(transport != nullptr ? std::move(transport) : make_default_transport()),
      gate_(std::make_unique<InFlightGate>(config_.max_in_flight)) {}

LiveClient::~LiveClient() = default;

HttpResult LiveClient::post_with_retries(const std::string& url, const std::string& body,
                                         const std::string& digest) {
    static thread_local std::mt19937 jitter_rng{std::random_device{}()};
    for (int attempt = 0;; ++attempt) {
        HttpResult result;
        {
            GateSlot slot(*gate_);
            result = transport_->post(url, config_.api_key, body);
        }
        if (result.status == 200) return result;
        if (result.status == 0) {
            throw LlmUnavailable("no response from " + url, digest);
        }
        if (result.status == 429) {
            if (attempt >= config_.max_retries) {
                throw RateLimited("rate limited by " + url + " after " +
                                  std::to_string(attempt + 1) + " attempts");
            }
            const int base = config_.backoff_base_ms * (1 << std::min(attempt, 6));
            std::uniform_int_distribution<int> jitter(0, std::max(1, config_.backoff_base_ms));
            std::this_thread::sleep_for(std::chrono::milliseconds(base + jitter(jitter_rng)));
            continue;
        }
        throw HttpError(result.status,
                        "HTTP " + std::to_string(result.status) + " from " + url);
    }
}

std::string LiveClient::chat(const ChatRequest& request) {
    const std::string digest = request_digest(request);
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back(json{{"role", m.role}, {"content", m.content}});
    }
    json body{{"model", request.model_id},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    HttpResult result =
        post_with_retries(config_.base_url + "/chat/completions", body.dump(), digest);
    try {
        json parsed = json::parse(result.body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw LlmUnavailable(std::string("malformed completion response: ") + e.what(), digest);
    }
}

std::vector<std::vector<double>> LiveClient::embed(const std::vector<std::string>& texts,
                                                   const std::string& model_id) {
    const std::string digest = request_digest(EmbedRequest{model_id, texts});
    const std::string base =
        config_.embed_base_url.empty() ? config_.base_url : config_.embed_base_url;
    json body{{"model", model_id}, {"input", texts}};
    HttpResult result = post_with_retries(base + "/embeddings", body.dump(), digest);

    std::vector<std::vector<double>> vectors(texts.size());
    std::vector<bool> seen(texts.size(), false);
    try {
        json parsed = json::parse(result.body);
        const json& data = parsed.at("data");
        if (data.size() != texts.size()) {
            throw DimensionMismatch("embedding count " + std::to_string(data.size()) +
                                    " != input count " + std::to_string(texts.size()));
        }
        for (std::size_t pos = 0; pos < data.size(); ++pos) {
            const json& entry = data.at(pos);
            const std::size_t index = entry.value("index", pos);
            if (index >= texts.size() || seen[index]) {
                throw DimensionMismatch("bad embedding index in response");
            }
            vectors[index] = entry.at("embedding").get<std::vector<double>>();
            seen[index] = true;
        }
    } catch (const json::exception& e) {
        throw LlmUnavailable(std::string("malformed embedding response: ") + e.what(), digest);
    }
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        if (vectors[i].size() != vectors[0].size()) {
            throw DimensionMismatch("embedding dimensions differ within one response");
        }
    }
    return vectors;
}

// ---------------------------------------------------------------------------
// ReplayClient
// ---------------------------------------------------------------------------

ReplayClient::ReplayClient(ReplayStore store) : store_(std::move(store)) {}

std::string ReplayClient::chat(const ChatRequest& request) {
    const std::string digest = request_digest(request);
    auto stored = store_.find(digest);
    if (!stored) {
        throw LlmUnavailable("no recorded completion for digest " + digest, digest);
    }
    return *stored;
}

std::vector<std::vector<double>> ReplayClient::embed(const std::vector<std::string>& texts,
                                                     const std::string& model_id) {
    const std::string digest = request_digest(EmbedRequest{model_id, texts});
    auto stored = store_.find(digest);
    if (!stored) {
        throw LlmUnavailable("no recorded embedding for digest " + digest, digest);
    }
    std::vector<std::vector<double>> vectors;
    try {
        vectors = json::parse(*stored).get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw LlmUnavailable(std::string("corrupt recorded embedding: ") + e.what(), digest);
    }
    if (vectors.size() != texts.size()) {
        throw DimensionMismatch("recorded embedding count " + std::to_string(vectors.size()) +
                                " != input count " + std::to_string(texts.size()));
    }
    return vectors;
}

// ---------------------------------------------------------------------------
// RecordingClient
// ---------------------------------------------------------------------------

RecordingClient::RecordingClient(ChatClient& inner, ReplayStore& store,
                                 std::optional<std::filesystem::path> sink)
    : inner_(inner), store_(store), sink_(std::move(sink)) {}

void RecordingClient::persist(const std::string& digest, const std::string& response) {
    store_.put(digest, response);
    if (!sink_) return;
    std::lock_guard lock(sink_mutex_);
    json entry{{"digest", digest}, {"response", response}};
    std::string existing;
    if (std::filesystem::exists(*sink_)) existing = read_file(*sink_);
    write_file(*sink_, existing + entry.dump() + "\n");
}

std::string RecordingClient::chat(const ChatRequest& request) {
    const std::string response = inner_.chat(request);
    persist(request_digest(request), response);
    return response;
}

std::vector<std::vector<double>> RecordingClient::embed(const std::vector<std::string>& texts,
                                                        const std::string& model_id) {
    auto vectors = inner_.embed(texts, model_id);
    persist(request_digest(EmbedRequest{model_id, texts}), json(vectors).dump());
    return vectors;
}

// ---------------------------------------------------------------------------
// Offline hash embedder
// ---------------------------------------------------------------------------

std::vector<double> hash_embed(std::string_view text, std::size_t dim) {
    if (dim < 8) throw DataError("hash_embed: dim must be >= 8");
    std::vector<double> vec(dim, 0.0);
    const std::vector<std::string> tokens = tokenize(text);
    auto bump = [&](const std::string& feature) {
        const std::uint64_t h = fnv1a64(feature);
        const double sign = ((h >> 32) & 1u) != 0 ? 1.0 : -1.0;
        vec[h % dim] += sign;
    };
    for (const auto& token : tokens) bump("t:" + token);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        bump("b:" + tokens[i] + " " + tokens[i + 1]);
    }
    double norm_sq = 0.0;
    for (double v : vec) norm_sq += v * v;
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& v : vec) v *= inv;
    }
    return vec;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("cosine_similarity: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace finrag
