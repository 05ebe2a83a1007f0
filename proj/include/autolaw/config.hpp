#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autolaw/backend.hpp"

namespace autolaw {

enum class ProviderKind { http, scripted };

struct ProviderConfig {
    std::string provider_id;
    ProviderKind kind = ProviderKind::http;
    std::string base_url;                     ///< http only
    std::optional<std::string> api_key_env;   ///< name of the variable holding the key
    std::optional<std::filesystem::path> script;  ///< scripted only: JSONL rules
    DecodeParams default_decode;
    int timeout_s = 120;
    int retries = 3;
    int max_concurrency = 4;
};

struct PathsConfig {
    std::filesystem::path corpus;
    std::filesystem::path pools;
    std::filesystem::path cache;    ///< directory of per-provider replay files
    std::filesystem::path reports;  ///< directory for every report a verb writes
};

struct DefaultsConfig {
    std::size_t k = 3;
    double theta = 0.5;
    int max_rounds = 5;
    std::uint64_t seed = 0;
};

enum class CacheMode { off, record, replay_only };

struct AppConfig {
    std::filesystem::path source;  ///< the file this was loaded from
    std::vector<ProviderConfig> providers;
    PathsConfig paths;
    DefaultsConfig defaults;
    CacheMode cache = CacheMode::record;
    std::optional<ModelRef> generator;
    std::optional<ModelRef> target;
    std::optional<ModelRef> verifier;
    std::optional<ModelRef> embedding;  ///< when absent, retrieval is lexical

    const ProviderConfig& provider(std::string_view id) const;
    /// Throws ConfigError on a duplicate or unknown provider, theta outside
    /// [0, 1), or a path whose parent directory does not exist.
    void validate() const;
};

/// Reads a JSON config (comments allowed). Relative paths resolve against the
/// config file's directory. Throws ConfigError naming the path when the file
/// is missing or malformed.
AppConfig load_config(const std::filesystem::path& path);
AppConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// One backend per provider, each wrapped in a replay cache stored at
/// "<paths.cache>/<provider_id>.jsonl" unless caching is off. API keys are
/// read from the named environment variables here and nowhere else.
BackendRegistry build_registry(const AppConfig& cfg);

/// A model reference with the provider's default decode parameters.
ModelRef model_ref(const AppConfig& cfg, const std::string& provider_id, const std::string& model_name);

/// True when path lies inside root once both are made absolute and normal.
bool is_within(const std::filesystem::path& path, const std::filesystem::path& root);

/// Commented template printed by `autolaw config example`.
std::string example_config_text();

}  // namespace autolaw
