#include "docrag/providers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace docrag {

namespace {

using nlohmann::json;

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

bool retryable(const HttpResponse& r) {
    return r.status == 0 || r.status == 429 || r.status >= 500;
}

// Runs `send` with exponential backoff; returns the first success or
// non-retryable response. Throws after max_attempts retryable failures.
HttpResponse with_retries(const RetryPolicy& policy, int& attempts_counter,
                          const std::function<HttpResponse()>& send) {
    HttpResponse last;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        ++attempts_counter;
        last = send();
        if (!retryable(last)) return last;
        if (attempt < policy.max_attempts && policy.sleep) {
            auto delay = policy.base_delay_ms * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(delay)));
        }
    }
    throw std::runtime_error("provider request failed after " +
                             std::to_string(policy.max_attempts) + " attempts (last status " +
                             std::to_string(last.status) + ")");
}

void check_auth(const HttpResponse& r) {
    if (r.status == 401 || r.status == 403)
        throw std::runtime_error("provider authentication failed (status " +
                                 std::to_string(r.status) + ")");
    if (r.status != 200)
        throw std::runtime_error("provider request rejected (status " +
                                 std::to_string(r.status) + ")");
}

} // namespace

HttpTransport default_http_transport() {
    return [](const HttpRequest& req) -> HttpResponse {
        // split scheme://host from path
        std::string url = req.url;
        size_t scheme = url.find("://");
        size_t path_start = scheme == std::string::npos ? url.find('/')
                                                        : url.find('/', scheme + 3);
        std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
        std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
        httplib::Client client(base);
        client.set_connection_timeout(10);
        client.set_read_timeout(60);
        httplib::Headers headers;
        for (const auto& [k, v] : req.headers) headers.emplace(k, v);
        auto res = client.Post(path, headers, req.body, "application/json");
        if (!res) return {0, ""};
        return {res->status, res->body};
    };
}

std::vector<EmbeddingVector> MockEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        uint64_t state = fnv1a(text);
        EmbeddingVector v;
        v.values.resize(static_cast<size_t>(dim_));
        double norm = 0;
        for (auto& x : v.values) {
            // uniform in [-1, 1)
            x = static_cast<float>(static_cast<double>(splitmix64(state) >> 11) /
                                       static_cast<double>(1ULL << 53) * 2.0 - 1.0);
            norm += static_cast<double>(x) * x;
        }
        norm = std::sqrt(std::max(norm, 1e-12));
        for (auto& x : v.values) x = static_cast<float>(x / norm);
        out.push_back(std::move(v));
    }
    return out;
}

std::string MockChatProvider::complete(const std::string& prompt) {
    if (mode_ == "canned") return canned_;
    return prompt;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(ProviderConfig config, HttpTransport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    const size_t batch = std::max(1, config_.batch_size);
    for (size_t start = 0; start < texts.size(); start += batch) {
        const size_t end = std::min(texts.size(), start + batch);
        json body = {{"model", config_.model}, {"input", json::array()}};
        for (size_t i = start; i < end; ++i) body["input"].push_back(texts[i]);
        HttpRequest req{config_.endpoint, body.dump(),
                        {{"Authorization", "Bearer " + config_.api_key}}};
        ++requests_made_;
        HttpResponse res = with_retries(config_.retry, attempts_made_,
                                        [&] { return transport_(req); });
        check_auth(res);
        json parsed = json::parse(res.body);
        for (const auto& item : parsed.at("data")) {
            EmbeddingVector v;
            for (const auto& x : item.at("embedding")) v.values.push_back(x.get<float>());
            if (!out.empty() && v.dim() != out.front().dim())
                throw std::runtime_error("embedding dimension mismatch across batches");
            out.push_back(std::move(v));
        }
    }
    if (out.size() != texts.size())
        throw std::runtime_error("embedding provider returned " + std::to_string(out.size()) +
                                 " vectors for " + std::to_string(texts.size()) + " texts");
    return out;
}

HttpChatProvider::HttpChatProvider(ProviderConfig config, HttpTransport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

std::string HttpChatProvider::complete(const std::string& prompt) {
    json body = {{"model", config_.model},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                 {"temperature", 0}};
    HttpRequest req{config_.endpoint, body.dump(),
                    {{"Authorization", "Bearer " + config_.api_key}}};
    HttpResponse res = with_retries(config_.retry, attempts_made_,
                                    [&] { return transport_(req); });
    check_auth(res);
    json parsed = json::parse(res.body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config) {
    if (config.provider == "mock")
        return std::make_unique<MockEmbeddingProvider>(config.mock_dim);
    return std::make_unique<HttpEmbeddingProvider>(config);
}

std::unique_ptr<ChatProvider> make_chat_provider(const ProviderConfig& config) {
    if (config.provider == "mock")
        return std::make_unique<MockChatProvider>(config.mock_mode, config.mock_canned);
    return std::make_unique<HttpChatProvider>(config);
}

} // namespace docrag
