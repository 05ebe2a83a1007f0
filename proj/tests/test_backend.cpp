#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "autolaw/backend.hpp"
#include "autolaw/error.hpp"
#include "autolaw/http_backend.hpp"
#include "oracles.hpp"

using namespace autolaw;
namespace fs = std::filesystem;

namespace {

ModelRef model(std::string name = "Qwen2.5") { return ModelRef{"offline", std::move(name), {}}; }

std::vector<Message> user(std::string text) { return {{MessageRole::user, std::move(text)}}; }

fs::path temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("autolaw-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Minimal OpenAI-compatible server on an ephemeral port.
struct StubServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    StubServer() = default;
    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

std::string completion(const std::string& content) {
    return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

HttpEndpoint endpoint(const StubServer& s) {
    HttpEndpoint ep;
    ep.base_url = s.url();
    ep.timeout = std::chrono::milliseconds(5000);
    ep.backoff_base = std::chrono::milliseconds(1);
    ep.max_retries = 3;
    return ep;
}

}  // namespace

TEST_SUITE("backend") {

TEST_CASE("request fingerprint matches an independent SHA-256 of the canonical form") {
    const std::vector<Message> msgs{{MessageRole::system, "You are a judge."},
                                    {MessageRole::user, "Scenario: caf\xC3\xA9 \"quoted\"\nline two"}};
    const auto m = model();
    CHECK(canonical_request(m, msgs) ==
          R"({"provider_id":"offline","model_name":"Qwen2.5","decode":{"temperature":0.0,"max_tokens":1024,"seed":null},"messages":[{"role":"system","content":"You are a judge."},{"role":"user","content":"Scenario: café \"quoted\"\nline two"}]})");
    // Digest computed with Python's hashlib over the string above.
    CHECK(request_fingerprint(m, msgs) == "d44063d382bc3b1ef3c0cd0617c4e739f40918cfb935399fba2b549ae42e74bd");
}

TEST_CASE("fingerprint changes with any field of the request") {
    const auto base = request_fingerprint(model(), user("hello"));
    auto seeded = model();
    seeded.decode.seed = 3;
    auto warm = model();
    warm.decode.temperature = 0.7;
    CHECK(request_fingerprint(model("Phi4"), user("hello")) != base);
    CHECK(request_fingerprint(seeded, user("hello")) != base);
    CHECK(request_fingerprint(warm, user("hello")) != base);
    CHECK(request_fingerprint(model(), user("hello ")) != base);
    const std::vector<Message> sys{{MessageRole::system, "hello"}};
    CHECK(request_fingerprint(model(), sys) != base);
    CHECK(request_fingerprint(model(), user("hello")) == base);
}

TEST_CASE("glob matching") {
    CHECK(glob_match("*", ""));
    CHECK(glob_match("a*c", "abbbc"));
    CHECK(glob_match("a?c", "abc"));
    CHECK_FALSE(glob_match("a?c", "ac"));
    CHECK(glob_match("*Scenario: Sarah*", "line\nScenario: Sarah quickly"));
    CHECK_FALSE(glob_match("abc", "ABC"));
    CHECK(glob_match("*x*y*", "..x..y.."));
    CHECK_FALSE(glob_match("*x*y", "..y..x"));
}

TEST_CASE("scripted backend answers by first matching rule") {
    ScriptedBackend b;
    b.add_rule({std::string("Phi4"), "*bite*", "#### Answer: No"});
    b.add_rule({std::nullopt, "*bite*", "#### Answer: Yes"});
    b.add_handler([](const ModelRef&, std::span<const Message> m) -> std::optional<std::string> {
        if (m.back().content == "echo") return "echo!";
        return std::nullopt;
    });
    CHECK(b.complete(model("Phi4"), user("a bite")) == "#### Answer: No");
    CHECK(b.complete(model("Mistral"), user("a bite")) == "#### Answer: Yes");
    CHECK(b.complete(model(), user("echo")) == "echo!");
    CHECK_THROWS_AS(b.complete(model(), user("nothing matches")), EmptyResponse);
    b.set_default("fallback");
    CHECK(b.complete(model(), user("nothing matches")) == "fallback");
    CHECK(b.outbound_requests() == 5);
}

TEST_CASE("scripted backend loads rule files") {
    const auto dir = temp_dir("script");
    {
        std::ofstream out(dir / "rules.jsonl");
        out << R"({"model":"A","pattern":"*x*","response":"for A"})" << '\n'
            << R"({"pattern":"*x*","response":"anyone"})" << '\n'
            << R"({"default":"otherwise"})" << '\n';
    }
    auto b = ScriptedBackend::from_file(dir / "rules.jsonl");
    CHECK(b->complete(model("A"), user("x")) == "for A");
    CHECK(b->complete(model("B"), user("x")) == "anyone");
    CHECK(b->complete(model("B"), user("y")) == "otherwise");
}

TEST_CASE("messages must start with a system or user turn") {
    CHECK_THROWS_AS(validate_messages({}), std::invalid_argument);
    const std::vector<Message> bad{{MessageRole::assistant, "hi"}};
    CHECK_THROWS_AS(validate_messages(bad), std::invalid_argument);
    CHECK_NOTHROW(validate_messages(user("ok")));
}

TEST_CASE("replay cache records once and replays offline") {
    const auto dir = temp_dir("replay");
    auto inner = std::make_shared<ScriptedBackend>();
    inner->set_default("#### Answer: Yes");
    {
        ReplayCache cache(inner, dir / "offline.jsonl", ReplayCache::Mode::record);
        CHECK(cache.complete(model(), user("one")) == "#### Answer: Yes");
        CHECK(cache.complete(model(), user("one")) == "#### Answer: Yes");
        CHECK(cache.complete(model(), user("two")) == "#### Answer: Yes");
        CHECK(cache.hits() == 1);
        CHECK(cache.misses() == 2);
        CHECK(inner->outbound_requests() == 2);
    }
    CHECK(oracle::lines_of(dir / "offline.jsonl").size() == 2);

    auto silent = std::make_shared<ScriptedBackend>();
    ReplayCache replay(silent, dir / "offline.jsonl", ReplayCache::Mode::replay_only);
    CHECK(replay.size() == 2);
    CHECK(replay.complete(model(), user("two")) == "#### Answer: Yes");
    CHECK_THROWS_AS(replay.complete(model(), user("three")), ReplayMiss);
    CHECK(silent->outbound_requests() == 0);
    CHECK(replay.outbound_requests() == 0);
}

TEST_CASE("replay cache is safe under concurrent identical requests") {
    const auto dir = temp_dir("replay-concurrent");
    auto inner = std::make_shared<ScriptedBackend>();
    inner->set_default("same");
    ReplayCache cache(inner, dir / "c.jsonl", ReplayCache::Mode::record);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t)
        threads.emplace_back([&] {
            for (int i = 0; i < 20; ++i) cache.complete(model(), user("q" + std::to_string(i % 5)));
        });
    for (auto& t : threads) t.join();
    CHECK(inner->outbound_requests() == 5);
    CHECK(oracle::lines_of(dir / "c.jsonl").size() == 5);
}

TEST_CASE("registry routes by provider id") {
    BackendRegistry reg;
    auto a = std::make_shared<ScriptedBackend>();
    a->set_default("from a");
    reg.add("offline", a);
    CHECK(reg.complete(model(), user("x")) == "from a");
    CHECK(reg.contains("offline"));
    CHECK_THROWS_AS(reg.at("missing"), ConfigError);
    CHECK(reg.outbound_requests() == 1);
}

TEST_CASE("http backend speaks the chat completions protocol") {
    StubServer s;
    std::string seen_auth, seen_body;
    s.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        res.set_content(completion("Reasoning.\n#### Answer: Yes"), "application/json");
    });
    s.start();
    auto ep = endpoint(s);
    ep.api_key = "sk-test";
    ep.require_api_key = true;
    HttpBackend http(ep);
    CHECK(http.complete(model(), user("Scenario: x")) == "Reasoning.\n#### Answer: Yes");
    CHECK(seen_auth == "Bearer sk-test");
    const auto body = nlohmann::json::parse(seen_body);
    CHECK(body.at("model") == "Qwen2.5");
    CHECK(body.at("messages").at(0).at("content") == "Scenario: x");
    CHECK(http.outbound_requests() == 1);
}

TEST_CASE("http backend retries server errors then succeeds") {
    StubServer s;
    std::atomic<int> calls{0};
    s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 503;
            return;
        }
        res.set_content(completion("ok"), "application/json");
    });
    s.start();
    HttpBackend http(endpoint(s));
    CHECK(http.complete(model(), user("x")) == "ok");
    CHECK(calls == 3);
}

TEST_CASE("http backend error mapping") {
    StubServer s;
    s.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (req.body.find("auth") != std::string::npos) {
            res.status = 401;
        } else if (req.body.find("busy") != std::string::npos) {
            res.status = 429;
        } else {
            res.set_content(completion(""), "application/json");
        }
    });
    s.start();
    HttpBackend http(endpoint(s));
    CHECK_THROWS_AS(http.complete(model(), user("auth")), AuthFailure);
    CHECK_THROWS_AS(http.complete(model(), user("busy")), RateLimited);
    CHECK_THROWS_AS(http.complete(model(), user("empty")), EmptyResponse);

    auto keyless = endpoint(s);
    keyless.require_api_key = true;
    HttpBackend needs_key(keyless);
    CHECK_THROWS_AS(needs_key.complete(model(), user("x")), AuthFailure);
}

TEST_CASE("http backend reports an unreachable endpoint") {
    HttpEndpoint ep;
    ep.base_url = "http://127.0.0.1:1/v1";
    ep.timeout = std::chrono::milliseconds(300);
    ep.backoff_base = std::chrono::milliseconds(1);
    ep.max_retries = 1;
    HttpBackend http(ep);
    CHECK_THROWS_AS(http.complete(model(), user("x")), EndpointUnreachable);
}

TEST_CASE("http embeddings") {
    StubServer s;
    s.server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"data":[{"embedding":[0.6,0.8]}]})", "application/json");
    });
    s.start();
    HttpBackend http(endpoint(s));
    const auto v = http.embed(model("emb"), "text");
    REQUIRE(v.size() == 2);
    CHECK(v[1] == doctest::Approx(0.8));
}

}  // TEST_SUITE
