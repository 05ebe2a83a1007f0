#include <fstream>

#include "autolaw/backend.hpp"
#include "autolaw/error.hpp"
#include "autolaw/log.hpp"

namespace autolaw {

ReplayCache::ReplayCache(std::shared_ptr<Backend> inner, std::filesystem::path path, Mode mode)
    : inner_(std::move(inner)), path_(std::move(path)), mode_(mode) {
    if (inner_ && inner_->kind() == BackendKind::replay_cache)
        throw ConfigError("a replay cache cannot wrap another replay cache");
    if (!inner_ && mode_ == Mode::record) throw ConfigError("record mode needs an underlying backend");

    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            entries_[j.at("fingerprint").get<std::string>()] = j.at("response").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            // A torn final line from an interrupted writer is dropped, not fatal.
            log::warn("replay cache " + path_.string() + ": skipping malformed line " + std::to_string(lineno));
        }
    }
}

std::string ReplayCache::complete(const ModelRef& model, std::span<const Message> messages) {
    validate_messages(messages);
    const std::string key = request_fingerprint(model, messages);

    std::shared_ptr<std::mutex> key_lock;
    {
        std::lock_guard lock(mu_);
        if (auto it = entries_.find(key); it != entries_.end()) {
            hits_.fetch_add(1);
            return it->second;
        }
        if (mode_ == Mode::replay_only) {
            misses_.fetch_add(1);
            throw ReplayMiss("replay cache has no entry for " + model.provider_id + "/" + model.model_name +
                             " (fingerprint " + key + ")");
        }
        auto& slot = key_locks_[key];
        if (!slot) slot = std::make_shared<std::mutex>();
        key_lock = slot;
    }

    // One forwarded request per key even when identical calls race.
    std::lock_guard key_guard(*key_lock);
    {
        std::lock_guard lock(mu_);
        if (auto it = entries_.find(key); it != entries_.end()) {
            hits_.fetch_add(1);
            return it->second;
        }
    }
    misses_.fetch_add(1);
    std::string response = inner_->complete(model, messages);

    std::lock_guard lock(mu_);
    entries_.emplace(key, response);
    nlohmann::json rec{{"fingerprint", key}, {"model", model}, {"messages", std::vector<Message>(messages.begin(), messages.end())}, {"response", response}};
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    out << rec.dump() << '\n';
    out.flush();
    return response;
}

std::uint64_t ReplayCache::outbound_requests() const noexcept {
    return inner_ ? inner_->outbound_requests() : 0;
}

std::size_t ReplayCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

}  // namespace autolaw
