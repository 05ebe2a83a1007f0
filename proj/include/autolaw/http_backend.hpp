#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <string>

#include "autolaw/backend.hpp"

namespace autolaw {

/// Connection settings for one OpenAI-compatible endpoint.
struct HttpEndpoint {
    std::string base_url;                ///< e.g. "http://localhost:11434/v1"
    std::optional<std::string> api_key;  ///< resolved from the configured env var
    bool require_api_key = false;        ///< true when the config names an env var
    std::chrono::milliseconds timeout{120'000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    int max_concurrency = 4;
};

/// POSTs /chat/completions (and /embeddings) with retries and jittered
/// exponential backoff on transport errors, 429 and 5xx. A semaphore bounds
/// in-flight requests for the provider.
class HttpBackend final : public Backend, public Embedder {
public:
    explicit HttpBackend(HttpEndpoint endpoint);

    std::string complete(const ModelRef& model, std::span<const Message> messages) override;
    std::vector<double> embed(const ModelRef& model, std::string_view text) override;

    BackendKind kind() const noexcept override { return BackendKind::http_openai_compatible; }
    std::uint64_t outbound_requests() const noexcept override { return requests_.load(); }

    const HttpEndpoint& endpoint() const noexcept { return endpoint_; }

private:
    std::string post(const std::string& route, const std::string& body);

    class Slot;

    HttpEndpoint endpoint_;
    std::string origin_;       ///< scheme://host[:port]
    std::string path_prefix_;  ///< e.g. "/v1"
    std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    std::atomic<std::uint64_t> requests_{0};
    std::atomic<std::uint64_t> jitter_counter_{0};
};

}  // namespace autolaw
