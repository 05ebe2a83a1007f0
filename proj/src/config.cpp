#include "autolaw/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "autolaw/error.hpp"
#include "autolaw/http_backend.hpp"

namespace autolaw {

namespace fs = std::filesystem;

const ProviderConfig& AppConfig::provider(std::string_view id) const {
    for (const auto& p : providers)
        if (p.provider_id == id) return p;
    throw ConfigError("unknown provider: " + std::string(id));
}

namespace {

void check_parent(const fs::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("paths.") + what + " is not set");
    const auto parent = fs::absolute(p).parent_path();
    if (!fs::is_directory(parent))
        throw ConfigError(std::string("paths.") + what + ": directory " + parent.string() + " does not exist");
}

void check_model(const std::optional<ModelRef>& m, const AppConfig& cfg, const char* what) {
    if (!m) return;
    try {
        cfg.provider(m->provider_id);
    } catch (const ConfigError&) {
        throw ConfigError(std::string("models.") + what + " names unknown provider " + m->provider_id);
    }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal();
}

ProviderKind provider_kind(const std::string& s) {
    if (s == "http") return ProviderKind::http;
    if (s == "scripted") return ProviderKind::scripted;
    throw ConfigError("unknown provider kind: " + s);
}

CacheMode cache_mode(const std::string& s) {
    if (s == "off") return CacheMode::off;
    if (s == "record") return CacheMode::record;
    if (s == "replay_only") return CacheMode::replay_only;
    throw ConfigError("unknown cache mode: " + s);
}

}  // namespace

void AppConfig::validate() const {
    std::set<std::string> ids;
    for (const auto& p : providers) {
        if (p.provider_id.empty()) throw ConfigError("provider with empty provider_id");
        if (!ids.insert(p.provider_id).second) throw ConfigError("duplicate provider " + p.provider_id);
        if (p.kind == ProviderKind::http && p.base_url.empty())
            throw ConfigError("provider " + p.provider_id + " needs a base_url");
        if (p.kind == ProviderKind::scripted && !p.script)
            throw ConfigError("scripted provider " + p.provider_id + " needs a script file");
        if (p.script && !fs::exists(*p.script))
            throw ConfigError("script for provider " + p.provider_id + " not found: " + p.script->string());
        if (p.retries < 0 || p.timeout_s <= 0 || p.max_concurrency < 1)
            throw ConfigError("provider " + p.provider_id + " has non-positive limits");
    }
    if (!(defaults.theta >= 0.0 && defaults.theta < 1.0)) throw ConfigError("defaults.theta must lie in [0, 1)");
    if (defaults.k == 0) throw ConfigError("defaults.k must be positive");
    if (defaults.max_rounds < 1) throw ConfigError("defaults.max_rounds must be at least 1");
    check_parent(paths.corpus, "corpus");
    check_parent(paths.pools, "pools");
    check_parent(paths.cache, "cache");
    check_parent(paths.reports, "reports");
    check_model(generator, *this, "generator");
    check_model(target, *this, "target");
    check_model(verifier, *this, "verifier");
    check_model(embedding, *this, "embedding");
}

AppConfig parse_config(const nlohmann::json& j, const fs::path& base_dir) {
    reject_unknown(j, {"providers", "models", "paths", "defaults", "cache"}, "config");
    AppConfig cfg;
    try {
        for (const auto& pj : j.value("providers", nlohmann::json::array())) {
            reject_unknown(pj,
                           {"provider_id", "kind", "base_url", "api_key_env", "script", "default_decode", "timeout_s",
                            "retries", "max_concurrency"},
                           "provider");
            ProviderConfig p;
            pj.at("provider_id").get_to(p.provider_id);
            p.kind = provider_kind(pj.value("kind", "http"));
            p.base_url = pj.value("base_url", "");
            if (pj.contains("api_key_env")) p.api_key_env = pj.at("api_key_env").get<std::string>();
            if (pj.contains("script")) p.script = resolve(base_dir, pj.at("script").get<std::string>());
            if (pj.contains("default_decode")) p.default_decode = pj.at("default_decode").get<DecodeParams>();
            p.timeout_s = pj.value("timeout_s", p.timeout_s);
            p.retries = pj.value("retries", p.retries);
            p.max_concurrency = pj.value("max_concurrency", p.max_concurrency);
            cfg.providers.push_back(std::move(p));
        }

        const auto paths = j.value("paths", nlohmann::json::object());
        reject_unknown(paths, {"corpus", "pools", "cache", "reports"}, "paths");
        cfg.paths.corpus = resolve(base_dir, paths.value("corpus", "corpus.jsonl"));
        cfg.paths.pools = resolve(base_dir, paths.value("pools", "pool.jsonl"));
        cfg.paths.cache = resolve(base_dir, paths.value("cache", "cache"));
        cfg.paths.reports = resolve(base_dir, paths.value("reports", "reports"));

        const auto defaults = j.value("defaults", nlohmann::json::object());
        reject_unknown(defaults, {"k", "theta", "max_rounds", "seed"}, "defaults");
        cfg.defaults.k = defaults.value("k", cfg.defaults.k);
        cfg.defaults.theta = defaults.value("theta", cfg.defaults.theta);
        cfg.defaults.max_rounds = defaults.value("max_rounds", cfg.defaults.max_rounds);
        cfg.defaults.seed = defaults.value("seed", cfg.defaults.seed);

        cfg.cache = cache_mode(j.value("cache", "record"));

        const auto models = j.value("models", nlohmann::json::object());
        reject_unknown(models, {"generator", "target", "verifier", "embedding"}, "models");
        auto model = [&](const char* key) -> std::optional<ModelRef> {
            if (!models.contains(key)) return std::nullopt;
            const auto& mj = models.at(key);
            reject_unknown(mj, {"provider_id", "model_name", "decode"}, std::string("models.") + key);
            ModelRef m;
            mj.at("provider_id").get_to(m.provider_id);
            mj.at("model_name").get_to(m.model_name);
            if (mj.contains("decode")) {
                m.decode = mj.at("decode").get<DecodeParams>();
            } else {
                for (const auto& p : cfg.providers)
                    if (p.provider_id == m.provider_id) m.decode = p.default_decode;
            }
            return m;
        };
        cfg.generator = model("generator");
        cfg.target = model("target");
        cfg.verifier = model("verifier");
        cfg.embedding = model("embedding");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

AppConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        auto cfg = parse_config(j, fs::absolute(path).parent_path());
        cfg.source = path;
        return cfg;
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

BackendRegistry build_registry(const AppConfig& cfg) {
    BackendRegistry registry;
    if (cfg.cache != CacheMode::off) fs::create_directories(cfg.paths.cache);
    for (const auto& p : cfg.providers) {
        std::shared_ptr<Backend> backend;
        if (p.kind == ProviderKind::scripted) {
            backend = ScriptedBackend::from_file(*p.script);
        } else {
            HttpEndpoint ep;
            ep.base_url = p.base_url;
            if (p.api_key_env) {
                ep.require_api_key = true;
                if (const char* key = std::getenv(p.api_key_env->c_str()); key && *key) ep.api_key = key;
            }
            ep.timeout = std::chrono::seconds(p.timeout_s);
            ep.max_retries = p.retries;
            ep.max_concurrency = p.max_concurrency;
            auto http = std::make_shared<HttpBackend>(std::move(ep));
            registry.add_embedder(p.provider_id, http);
            backend = http;
        }
        if (cfg.cache != CacheMode::off) {
            const auto mode = cfg.cache == CacheMode::record ? ReplayCache::Mode::record : ReplayCache::Mode::replay_only;
            backend = std::make_shared<ReplayCache>(backend, cfg.paths.cache / (p.provider_id + ".jsonl"), mode);
        }
        registry.add(p.provider_id, std::move(backend));
    }
    return registry;
}

ModelRef model_ref(const AppConfig& cfg, const std::string& provider_id, const std::string& model_name) {
    return ModelRef{provider_id, model_name, cfg.provider(provider_id).default_decode};
}

bool is_within(const fs::path& path, const fs::path& root) {
    const auto p = fs::weakly_canonical(fs::absolute(path));
    const auto r = fs::weakly_canonical(fs::absolute(root));
    auto pit = p.begin();
    for (auto rit = r.begin(); rit != r.end(); ++rit, ++pit) {
        if (rit->empty()) continue;  // trailing separator
        if (pit == p.end() || *pit != *rit) return false;
    }
    return true;
}

std::string example_config_text() {
    return R"(// autolaw configuration. JSON with // comments allowed.
// Relative paths are resolved against the directory of this file.
{
  // Every model is addressed through a provider. "http" providers speak the
  // OpenAI-compatible /chat/completions and /embeddings API; "scripted"
  // providers answer from a JSONL rule file and never touch the network.
  "providers": [
    {
      "provider_id": "local",
      "kind": "http",
      "base_url": "http://localhost:11434/v1",
      // Name of the environment variable holding the API key. Keys are never
      // accepted as flags or stored in this file. Omit for keyless servers.
      "api_key_env": "AUTOLAW_API_KEY",
      "default_decode": { "temperature": 0.0, "max_tokens": 1024 },
      "timeout_s": 120,
      "retries": 3,
      "max_concurrency": 4
    },
    {
      "provider_id": "offline",
      "kind": "scripted",
      "script": "scripted_rules.jsonl"
    }
  ],

  // Models used by case-law generation and jury ranking. The jurors
  // themselves live in the pool file below.
  "models": {
    "generator": { "provider_id": "local", "model_name": "gpt-3.5-turbo" },
    "target":    { "provider_id": "local", "model_name": "llama3.1:8b" },
    "verifier":  { "provider_id": "local", "model_name": "gpt-4o" }
    // "embedding": { "provider_id": "local", "model_name": "text-embedding-3-small" }
  },

  // Every file a command writes lives under one of these paths.
  "paths": {
    "corpus": "corpus.jsonl",
    "pools": "pool.jsonl",
    "cache": "cache",
    "reports": "reports"
  },

  "defaults": { "k": 3, "theta": 0.5, "max_rounds": 5, "seed": 0 },

  // "record" forwards cache misses and stores them, "replay_only" fails on a
  // miss without any network traffic, "off" disables the cache.
  "cache": "record"
}
)";
}

}  // namespace autolaw
