#include "autolaw/http_backend.hpp"

#include <regex>
#include <thread>

#include <httplib.h>

#include "autolaw/error.hpp"
#include "autolaw/log.hpp"
#include "autolaw/rng.hpp"

namespace autolaw {

class HttpBackend::Slot {
public:
    explicit Slot(HttpBackend& b) : b_(b) {
        std::unique_lock lock(b_.mu_);
        b_.cv_.wait(lock, [&] { return b_.in_flight_ < b_.endpoint_.max_concurrency; });
        ++b_.in_flight_;
    }
    ~Slot() {
        {
            std::lock_guard lock(b_.mu_);
            --b_.in_flight_;
        }
        b_.cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    HttpBackend& b_;
};

HttpBackend::HttpBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(endpoint_.base_url, m, url_re))
        throw ConfigError("invalid base_url '" + endpoint_.base_url + "'");
    origin_ = m[1].str();
    path_prefix_ = m[2].matched ? m[2].str() : "";
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (endpoint_.max_concurrency < 1) endpoint_.max_concurrency = 1;
    if (endpoint_.max_retries < 0) endpoint_.max_retries = 0;
}

std::string HttpBackend::post(const std::string& route, const std::string& body) {
    if (endpoint_.require_api_key && !endpoint_.api_key)
        throw AuthFailure("no API key available for " + origin_ + " (configured environment variable is unset)");

    Slot slot(*this);
    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (endpoint_.api_key) headers.emplace("Authorization", "Bearer " + *endpoint_.api_key);

    const std::string path = path_prefix_ + route;
    std::string last_error;
    bool rate_limited = false;
    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto rng = RngStream::derive(jitter_counter_.fetch_add(1), origin_);
            const double factor = static_cast<double>(1u << std::min(attempt - 1, 16)) * (0.5 + rng.uniform());
            std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(endpoint_.backoff_base * factor));
        }
        requests_.fetch_add(1);
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            rate_limited = false;
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        const int status = res->status;
        if (status >= 200 && status < 300) return res->body;
        if (status == 401 || status == 403)
            throw AuthFailure(origin_ + path + " rejected credentials (HTTP " + std::to_string(status) + ")");
        if (status == 429) {
            rate_limited = true;
            last_error = "HTTP 429";
            continue;
        }
        if (status >= 500) {
            rate_limited = false;
            last_error = "HTTP " + std::to_string(status);
            continue;
        }
        throw EndpointUnreachable(origin_ + path + " returned HTTP " + std::to_string(status) + ": " + res->body);
    }
    const std::string msg = origin_ + path + " failed after " + std::to_string(endpoint_.max_retries + 1) +
                            " attempts: " + last_error;
    if (rate_limited) throw RateLimited(msg);
    throw EndpointUnreachable(msg);
}

std::string HttpBackend::complete(const ModelRef& model, std::span<const Message> messages) {
    validate_messages(messages);
    nlohmann::json req;
    req["model"] = model.model_name;
    req["messages"] = std::vector<Message>(messages.begin(), messages.end());
    req["temperature"] = model.decode.temperature;
    req["max_tokens"] = model.decode.max_tokens;
    if (model.decode.seed) req["seed"] = *model.decode.seed;
    req["stream"] = false;

    const std::string body = post("/chat/completions", req.dump());
    nlohmann::json res;
    try {
        res = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
        throw EmptyResponse("non-JSON completion body from " + origin_);
    }
    const auto& choices = res.value("choices", nlohmann::json::array());
    if (!choices.is_array() || choices.empty()) throw EmptyResponse("completion without choices from " + origin_);
    const auto& msg = choices.at(0).value("message", nlohmann::json::object());
    if (!msg.contains("content") || !msg.at("content").is_string())
        throw EmptyResponse("completion without message content from " + origin_);
    std::string content = msg.at("content").get<std::string>();
    if (content.empty()) throw EmptyResponse("empty completion from " + origin_ + " for " + model.model_name);
    return content;
}

std::vector<double> HttpBackend::embed(const ModelRef& model, std::string_view text) {
    nlohmann::json req{{"model", model.model_name}, {"input", std::string(text)}};
    std::string body;
    try {
        body = post("/embeddings", req.dump());
    } catch (const Error& e) {
        throw EmbeddingBackendUnavailable(e.what());
    }
    try {
        auto res = nlohmann::json::parse(body);
        auto vec = res.at("data").at(0).at("embedding").get<std::vector<double>>();
        if (vec.empty()) throw EmbeddingBackendUnavailable("empty embedding from " + origin_);
        return vec;
    } catch (const nlohmann::json::exception& e) {
        throw EmbeddingBackendUnavailable(std::string("bad embedding payload: ") + e.what());
    }
}

}  // namespace autolaw
