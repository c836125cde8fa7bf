#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace docrag {

struct EmbeddingVector {
    std::vector<float> values;
    size_t dim() const { return values.size(); }
};

// One HTTP exchange; injectable so tests can fake the wire.
struct HttpRequest {
    std::string url;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
    int status = 0; // 0 = transport failure
    std::string body;
};

using HttpTransport = std::function<HttpResponse(const HttpRequest&)>;

// POSTs via cpp-httplib.
HttpTransport default_http_transport();

struct RetryPolicy {
    int max_attempts = 3;
    double base_delay_ms = 100.0; // doubles per attempt
    bool sleep = true;            // tests disable real sleeping
};

struct ProviderConfig {
    std::string provider = "mock"; // "mock" or "openai"
    std::string endpoint;
    std::string model;
    std::string api_key;
    int batch_size = 64;
    RetryPolicy retry;
    // mock knobs
    int mock_dim = 64;
    std::string mock_mode = "hash"; // chat: "echo" | "canned"
    std::string mock_canned;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

// Deterministic hash-to-vector embedding, unit-normalized.
class MockEmbeddingProvider : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(int dim = 64) : dim_(dim) {}
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    int dim_;
};

// "echo" returns the prompt itself; "canned" returns a fixed string.
class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(std::string mode = "echo", std::string canned = "")
        : mode_(std::move(mode)), canned_(std::move(canned)) {}
    std::string complete(const std::string& prompt) override;

private:
    std::string mode_;
    std::string canned_;
};

// OpenAI-style /v1/embeddings client: batches requests, retries transient
// failures (HTTP 5xx, 429, transport errors) with exponential backoff.
// Throws std::runtime_error on auth failure, exhausted retries, or a
// dimension mismatch across batches; the message carries attempt counts.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(ProviderConfig config, HttpTransport transport = default_http_transport());
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

    int requests_made() const { return requests_made_; }
    int attempts_made() const { return attempts_made_; }

private:
    ProviderConfig config_;
    HttpTransport transport_;
    int requests_made_ = 0;
    int attempts_made_ = 0;
};

// OpenAI-style /v1/chat/completions client with the same retry behavior.
class HttpChatProvider : public ChatProvider {
public:
    HttpChatProvider(ProviderConfig config, HttpTransport transport = default_http_transport());
    std::string complete(const std::string& prompt) override;

    int attempts_made() const { return attempts_made_; }

private:
    ProviderConfig config_;
    HttpTransport transport_;
    int attempts_made_ = 0;
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config);
std::unique_ptr<ChatProvider> make_chat_provider(const ProviderConfig& config);

} // namespace docrag
