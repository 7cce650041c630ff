#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace finrag {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.2;  // in [0, 2]
    int max_tokens = 1024;
};

struct EmbedRequest {
    std::string model_id;
    std::vector<std::string> texts;
};

// Canonical byte-exact serialization used for fixture digests: a compact JSON
// object with keys in lexicographic order,
//   {"max_tokens":N,"messages":[{"content":C,"role":R},...],"model":M,"temperature":T}
// and for embeddings {"input":[...],"kind":"embed","model":M}. The digest is
// the 16-hex-char FNV-1a 64 of those bytes.
std::string canonical_request(const ChatRequest& request);
std::string canonical_request(const EmbedRequest& request);
std::string request_digest(const ChatRequest& request);
std::string request_digest(const EmbedRequest& request);

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

struct HttpResult {
    int status = 0;  // 0 means the connection itself failed
    std::string body;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResult post(const std::string& url, const std::string& bearer_token,
                            const std::string& json_body) = 0;
};

// cpp-httplib-backed transport; `url` is split into host and path.
std::shared_ptr<HttpTransport> make_default_transport();

// ---------------------------------------------------------------------------
// Replay store
// ---------------------------------------------------------------------------

// digest -> recorded completion. Append-only while recording, read-only in
// replay. Persisted as JSONL lines {"digest":..., "response":...}.
class ReplayStore {
public:
    ReplayStore() = default;
    static ReplayStore load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::optional<std::string> find(const std::string& digest) const;
    void put(const std::string& digest, const std::string& response);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::string> responses_;
    std::vector<std::string> insertion_order_;

public:
    ReplayStore(const ReplayStore& other);
    ReplayStore& operator=(const ReplayStore& other);
    ReplayStore(ReplayStore&& other) noexcept;
    ReplayStore& operator=(ReplayStore&& other) noexcept;
};

// ---------------------------------------------------------------------------
// Clients
// ---------------------------------------------------------------------------

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string chat(const ChatRequest& request) = 0;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                                   const std::string& model_id) = 0;
};

struct LiveConfig {
    std::string base_url;        // e.g. "http://localhost:8000/v1"
    std::string embed_base_url;  // defaults to base_url when empty
    std::string api_key;
    int max_retries = 5;     // on 429, with jittered exponential backoff
    int backoff_base_ms = 200;
    int max_in_flight = 4;

    static LiveConfig from_env();  // LLM_BASE_URL, EMBED_BASE_URL, LLM_API_KEY
};

// OpenAI-chat-compatible wire dialect for every live backend.
class LiveClient final : public ChatClient {
public:
    LiveClient(LiveConfig config, std::shared_ptr<HttpTransport> transport = nullptr);
    ~LiveClient() override;
    std::string chat(const ChatRequest& request) override;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                           const std::string& model_id) override;

private:
    HttpResult post_with_retries(const std::string& url, const std::string& body,
                                 const std::string& digest);

    LiveConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    std::unique_ptr<class InFlightGate> gate_;
};

// Answers exclusively from a ReplayStore; a miss raises LlmUnavailable
// carrying the digest so the missing fixture can be recorded.
class ReplayClient final : public ChatClient {
public:
    explicit ReplayClient(ReplayStore store);
    std::string chat(const ChatRequest& request) override;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                           const std::string& model_id) override;

    const ReplayStore& store() const { return store_; }

private:
    ReplayStore store_;
};

// Forwards to an inner client and records every exchange, optionally
// mirroring each entry to a JSONL sink as it happens.
class RecordingClient final : public ChatClient {
public:
    RecordingClient(ChatClient& inner, ReplayStore& store,
                    std::optional<std::filesystem::path> sink = std::nullopt);
    std::string chat(const ChatRequest& request) override;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                           const std::string& model_id) override;

private:
    void persist(const std::string& digest, const std::string& response);

    ChatClient& inner_;
    ReplayStore& store_;
    std::optional<std::filesystem::path> sink_;
    std::mutex sink_mutex_;
};

// ---------------------------------------------------------------------------
// Offline hash embedder
// ---------------------------------------------------------------------------

// Deterministic token/bigram feature hashing into `dim` buckets,
// L2-normalized. Equal texts map to equal vectors on every platform; empty
// text maps to the zero vector. dim must be >= 8.
std::vector<double> hash_embed(std::string_view text, std::size_t dim = 64);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace finrag
