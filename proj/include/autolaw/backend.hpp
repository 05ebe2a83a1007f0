#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace autolaw {

struct DecodeParams {
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;

    bool operator==(const DecodeParams&) const = default;
};

/// Names one model on one configured endpoint.
struct ModelRef {
    std::string provider_id;
    std::string model_name;
    DecodeParams decode;

    bool operator==(const ModelRef&) const = default;
};

enum class MessageRole { system, user, assistant };

struct Message {
    MessageRole role = MessageRole::user;
    std::string content;

    bool operator==(const Message&) const = default;
};

/// One request/response pair against a backend.
struct ChatExchange {
    std::vector<Message> messages;
    std::optional<std::string> response;
    std::optional<std::int64_t> latency_ms;
};

std::string_view to_string(MessageRole role);
MessageRole message_role_from_string(std::string_view s);

/// Throws std::invalid_argument unless messages are non-empty and start
/// with a system or user turn.
void validate_messages(std::span<const Message> messages);

void to_json(nlohmann::json& j, const DecodeParams& d);
void from_json(const nlohmann::json& j, DecodeParams& d);
void to_json(nlohmann::json& j, const ModelRef& m);
void from_json(const nlohmann::json& j, ModelRef& m);
void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);

enum class BackendKind { http_openai_compatible, scripted, replay_cache };

class Backend {
public:
    virtual ~Backend() = default;

    /// Returns the model's reply text. Safe to call concurrently.
    virtual std::string complete(const ModelRef& model, std::span<const Message> messages) = 0;
    virtual BackendKind kind() const noexcept = 0;
    /// Number of requests that reached the underlying model (network or script).
    virtual std::uint64_t outbound_requests() const noexcept = 0;
};

/// Text embedding endpoint, used by the embedding similarity backend.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const ModelRef& model, std::string_view text) = 0;
};

/// Canonical serialization used as the replay-cache key: fixed field order,
/// no added whitespace, message content preserved byte for byte.
std::string canonical_request(const ModelRef& model, std::span<const Message> messages);

/// SHA-256 of canonical_request, 64 lowercase hex characters.
std::string request_fingerprint(const ModelRef& model, std::span<const Message> messages);

/// Shell-style glob: '*' matches any run, '?' one byte. Case-sensitive.
bool glob_match(std::string_view pattern, std::string_view text);

struct ScriptRule {
    std::optional<std::string> model_name;  ///< restrict to one model when set
    std::string pattern;                    ///< glob over the joined message contents
    std::string response;
};

/// Deterministic offline backend. Rules and handlers are tried in insertion
/// order against all message contents joined with '\n'; the first match
/// answers.
class ScriptedBackend final : public Backend {
public:
    using Handler = std::function<std::optional<std::string>(const ModelRef&, std::span<const Message>)>;

    ScriptedBackend() = default;

    ScriptedBackend& add_rule(ScriptRule rule);
    ScriptedBackend& add_handler(Handler handler);
    ScriptedBackend& set_default(std::string response);

    /// JSONL, one {"pattern", "response", optional "model"} object per line.
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    std::string complete(const ModelRef& model, std::span<const Message> messages) override;
    BackendKind kind() const noexcept override { return BackendKind::scripted; }
    std::uint64_t outbound_requests() const noexcept override { return calls_.load(); }

private:
    struct Entry {
        std::optional<ScriptRule> rule;
        Handler handler;
    };
    std::vector<Entry> entries_;
    std::optional<std::string> default_;
    std::atomic<std::uint64_t> calls_{0};
};

/// Record/replay wrapper. Record mode forwards misses and appends them to the
/// cache file; replay-only mode raises ReplayMiss instead of forwarding.
class ReplayCache final : public Backend {
public:
    enum class Mode { record, replay_only };

    ReplayCache(std::shared_ptr<Backend> inner, std::filesystem::path path, Mode mode);

    std::string complete(const ModelRef& model, std::span<const Message> messages) override;
    BackendKind kind() const noexcept override { return BackendKind::replay_cache; }
    std::uint64_t outbound_requests() const noexcept override;

    std::uint64_t hits() const noexcept { return hits_.load(); }
    std::uint64_t misses() const noexcept { return misses_.load(); }
    std::size_t size() const;

private:
    std::shared_ptr<Backend> inner_;
    std::filesystem::path path_;
    Mode mode_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> entries_;
    std::map<std::string, std::shared_ptr<std::mutex>> key_locks_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
};

/// Maps provider ids to backends.
class BackendRegistry {
public:
    void add(std::string provider_id, std::shared_ptr<Backend> backend);
    void add_embedder(std::string provider_id, std::shared_ptr<Embedder> embedder);

    /// Throws ConfigError when provider_id is not configured.
    Backend& at(std::string_view provider_id) const;
    std::shared_ptr<Embedder> embedder(std::string_view provider_id) const;
    bool contains(std::string_view provider_id) const;

    std::string complete(const ModelRef& model, std::span<const Message> messages) const;

    std::uint64_t outbound_requests() const noexcept;

private:
    std::map<std::string, std::shared_ptr<Backend>, std::less<>> backends_;
    std::map<std::string, std::shared_ptr<Embedder>, std::less<>> embedders_;
};

}  // namespace autolaw
