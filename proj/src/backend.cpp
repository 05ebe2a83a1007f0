#include "autolaw/backend.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "autolaw/error.hpp"

namespace autolaw {

std::string_view to_string(MessageRole role) {
    switch (role) {
        case MessageRole::system: return "system";
        case MessageRole::user: return "user";
        case MessageRole::assistant: return "assistant";
    }
    return "user";
}

MessageRole message_role_from_string(std::string_view s) {
    if (s == "system") return MessageRole::system;
    if (s == "user") return MessageRole::user;
    if (s == "assistant") return MessageRole::assistant;
    throw std::invalid_argument("unknown message role: " + std::string(s));
}

void validate_messages(std::span<const Message> messages) {
    if (messages.empty()) throw std::invalid_argument("messages must be non-empty");
    if (messages.front().role == MessageRole::assistant)
        throw std::invalid_argument("first message must be a system or user turn");
}

void to_json(nlohmann::json& j, const DecodeParams& d) {
    j = nlohmann::json{{"temperature", d.temperature}, {"max_tokens", d.max_tokens}};
    if (d.seed) j["seed"] = *d.seed;
}

void from_json(const nlohmann::json& j, DecodeParams& d) {
    d = DecodeParams{};
    if (j.contains("temperature")) j.at("temperature").get_to(d.temperature);
    if (j.contains("max_tokens")) j.at("max_tokens").get_to(d.max_tokens);
    if (j.contains("seed") && !j.at("seed").is_null()) d.seed = j.at("seed").get<std::int64_t>();
    if (d.temperature < 0) throw std::invalid_argument("temperature must be >= 0");
    if (d.max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
}

void to_json(nlohmann::json& j, const ModelRef& m) {
    j = nlohmann::json{{"provider_id", m.provider_id}, {"model_name", m.model_name}, {"decode", m.decode}};
}

void from_json(const nlohmann::json& j, ModelRef& m) {
    j.at("provider_id").get_to(m.provider_id);
    j.at("model_name").get_to(m.model_name);
    m.decode = j.contains("decode") ? j.at("decode").get<DecodeParams>() : DecodeParams{};
}

void to_json(nlohmann::json& j, const Message& m) {
    j = nlohmann::json{{"role", to_string(m.role)}, {"content", m.content}};
}

void from_json(const nlohmann::json& j, Message& m) {
    m.role = message_role_from_string(j.at("role").get<std::string>());
    j.at("content").get_to(m.content);
}

std::string canonical_request(const ModelRef& model, std::span<const Message> messages) {
    nlohmann::ordered_json decode;
    decode["temperature"] = model.decode.temperature;
    decode["max_tokens"] = model.decode.max_tokens;
    decode["seed"] = model.decode.seed ? nlohmann::ordered_json(*model.decode.seed) : nlohmann::ordered_json();

    nlohmann::ordered_json msgs = nlohmann::ordered_json::array();
    for (const auto& m : messages) {
        nlohmann::ordered_json e;
        e["role"] = to_string(m.role);
        e["content"] = m.content;
        msgs.push_back(std::move(e));
    }

    nlohmann::ordered_json req;
    req["provider_id"] = model.provider_id;
    req["model_name"] = model.model_name;
    req["decode"] = std::move(decode);
    req["messages"] = std::move(msgs);
    return req.dump();
}

std::string request_fingerprint(const ModelRef& model, std::span<const Message> messages) {
    const std::string canonical = canonical_request(model, messages);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(canonical.data(), canonical.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0, t = 0;
    std::size_t star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

// ScriptedBackend

ScriptedBackend& ScriptedBackend::add_rule(ScriptRule rule) {
    entries_.push_back(Entry{std::move(rule), {}});
    return *this;
}

ScriptedBackend& ScriptedBackend::add_handler(Handler handler) {
    entries_.push_back(Entry{std::nullopt, std::move(handler)});
    return *this;
}

ScriptedBackend& ScriptedBackend::set_default(std::string response) {
    default_ = std::move(response);
    return *this;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open script file " + path.string());
    auto backend = std::make_shared<ScriptedBackend>();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(lineno, e.what());
        }
        if (j.contains("default")) {
            backend->set_default(j.at("default").get<std::string>());
            continue;
        }
        ScriptRule rule;
        rule.pattern = j.at("pattern").get<std::string>();
        rule.response = j.at("response").get<std::string>();
        if (j.contains("model")) rule.model_name = j.at("model").get<std::string>();
        backend->add_rule(std::move(rule));
    }
    return backend;
}

std::string ScriptedBackend::complete(const ModelRef& model, std::span<const Message> messages) {
    validate_messages(messages);
    calls_.fetch_add(1);

    std::string joined;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (i) joined.push_back('\n');
        joined += messages[i].content;
    }

    for (const auto& e : entries_) {
        std::optional<std::string> out;
        if (e.rule) {
            if (e.rule->model_name && *e.rule->model_name != model.model_name) continue;
            if (glob_match(e.rule->pattern, joined)) out = e.rule->response;
        } else {
            out = e.handler(model, messages);
        }
        if (out) {
            if (out->empty()) throw EmptyResponse("scripted backend returned empty text for " + model.model_name);
            return *out;
        }
    }
    if (default_ && !default_->empty()) return *default_;
    throw EmptyResponse("no scripted rule matched for model " + model.model_name);
}

// BackendRegistry

void BackendRegistry::add(std::string provider_id, std::shared_ptr<Backend> backend) {
    backends_[std::move(provider_id)] = std::move(backend);
}

void BackendRegistry::add_embedder(std::string provider_id, std::shared_ptr<Embedder> embedder) {
    embedders_[std::move(provider_id)] = std::move(embedder);
}

Backend& BackendRegistry::at(std::string_view provider_id) const {
    auto it = backends_.find(provider_id);
    if (it == backends_.end()) throw ConfigError("no endpoint configured for provider '" + std::string(provider_id) + "'");
    return *it->second;
}

std::shared_ptr<Embedder> BackendRegistry::embedder(std::string_view provider_id) const {
    auto it = embedders_.find(provider_id);
    return it == embedders_.end() ? nullptr : it->second;
}

bool BackendRegistry::contains(std::string_view provider_id) const {
    return backends_.find(provider_id) != backends_.end();
}

std::string BackendRegistry::complete(const ModelRef& model, std::span<const Message> messages) const {
    return at(model.provider_id).complete(model, messages);
}

std::uint64_t BackendRegistry::outbound_requests() const noexcept {
    std::uint64_t total = 0;
    for (const auto& [_, b] : backends_) total += b->outbound_requests();
    return total;
}

}  // namespace autolaw
