#include <doctest.h>

#include <filesystem>

#include "autolaw/deliberation.hpp"
#include "autolaw/error.hpp"
#include "autolaw/juryrank.hpp"
#include "autolaw/rng.hpp"
#include "oracles.hpp"

using namespace autolaw;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(AUTOLAW_DATA_DIR) / "fixtures";

std::vector<Vote> votes_from_mask(std::size_t mask, std::size_t k) {
    std::vector<Vote> v;
    for (std::size_t i = 0; i < k; ++i)
        v.push_back({"J" + std::to_string(i), "", ((mask >> i) & 1) ? Answer::yes : Answer::no, {}});
    return v;
}

JuryMatchedRecord record_with_text(const std::string& id, const std::string& text, const std::string& tag) {
    CaseLawRecord c{Scenario{id, text, tag, ScenarioKind::implicit_violation, 1}, Misconduct{tag, "r", "d"},
                    Regulation{"r", "Reg", "", std::nullopt, std::nullopt}};
    return make_matched_record(std::move(c), {{"J1", 0.5}}, 1);
}

struct Fixture {
    std::vector<JuryMatchedRecord> corpus;
    JuryPool pool;
    BackendRegistry registry;
    LexicalSimilarity sim;

    Fixture() {
        corpus = records_of<JuryMatchedRecord>(load_store(kFixtures / "corpus.jsonl"));
        pool = load_pool(kFixtures / "pool.jsonl");
        registry.add("offline", ScriptedBackend::from_file(kFixtures / "scripted_rules.jsonl"));
        std::vector<std::string> docs;
        for (const auto& m : corpus) docs.push_back(m.record.scenario.text);
        sim.fit(docs);
    }
};

const std::string kSarah =
    "Sarah quickly unwrapped her sandwich and took a bite on the train due to a medical condition that required "
    "her to eat immediately.";

}  // namespace

TEST_SUITE("deliberation") {

TEST_CASE("aggregation truth table for k = 1..5") {
    for (std::size_t k = 1; k <= 5; ++k) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
            std::size_t yes = 0;
            for (std::size_t i = 0; i < k; ++i) yes += (mask >> i) & 1;
            CHECK(aggregate(votes_from_mask(mask, k), 0.5) == (2 * yes > k));
        }
    }
}

TEST_CASE("aggregation edge cases") {
    CHECK_THROWS_AS(aggregate({}, 0.5), EmptyVotes);
    auto v = votes_from_mask(0b11, 2);
    CHECK(aggregate(v, 0.5));
    v[1].parsed = Answer::unparseable;
    CHECK_FALSE(aggregate(v, 0.5));
    CHECK(aggregate(v, 0.0));
    CHECK_THROWS_AS(aggregate(v, 1.0), std::invalid_argument);
}

TEST_CASE("lexical similarity properties") {
    CHECK(similarity("the train", "the train") == 1.0);
    CHECK(similarity("eating bread", "smoking pipe") == 0.0);
    const double ab = similarity("eating on the train", "a train snack");
    CHECK(ab == doctest::Approx(similarity("a train snack", "eating on the train")));
    CHECK(ab > 0.0);
    CHECK(ab < 1.0);
    CHECK(tokenize("Don't EAT, on-train!") == std::vector<std::string>{"don", "t", "eat", "on", "train"});
}

TEST_CASE("fitted IDF follows the smoothed formula") {
    LexicalSimilarity s;
    const std::vector<std::string> docs{"train food", "train smoke", "car park"};
    s.fit(docs);
    CHECK(s.weight("train") == doctest::Approx(std::log(4.0 / 3.0) + 1.0));
    CHECK(s.weight("park") == doctest::Approx(std::log(4.0 / 2.0) + 1.0));
    CHECK(s.weight("unseen") == doctest::Approx(std::log(4.0 / 1.0) + 1.0));
}

TEST_CASE("retrieval equals a linear scan with lowest-index ties") {
    auto rng = RngStream::derive(5, "retrieval");
    const std::vector<std::string> words{"train", "food", "smoke", "car", "park", "coupon", "petrol", "bus"};
    auto sentence = [&] {
        std::string s;
        for (int i = 0; i < 4; ++i) s += words[rng.below(words.size())] + " ";
        return s;
    };
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<JuryMatchedRecord> corpus;
        const std::size_t n = 1 + rng.below(12);
        for (std::size_t i = 0; i < n; ++i) corpus.push_back(record_with_text("c" + std::to_string(i), sentence(), "t"));
        const Scenario x{"x", sentence(), std::nullopt, ScenarioKind::real_world, 0};
        LexicalSimilarity sim;
        std::size_t best = 0;
        double best_sim = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = sim.scenarios(x, corpus[i].record.scenario);
            if (s > best_sim) {
                best_sim = s;
                best = i;
            }
        }
        const auto hit = nearest_case_index(x, corpus, sim);
        CHECK(hit.index == best);
        CHECK(hit.similarity == best_sim);
    }
    CHECK_THROWS_AS(nearest_case_index(Scenario{}, std::span<const JuryMatchedRecord>{}, LexicalSimilarity{}),
                    EmptyCorpus);
}

TEST_CASE("tag similarity matches on misconduct tags only") {
    TagSimilarity sim;
    const Scenario a{"a", "x", "m01", ScenarioKind::implicit_violation, 1};
    const Scenario b{"b", "y", "m01", ScenarioKind::implicit_violation, 1};
    const Scenario c{"c", "x", "m02", ScenarioKind::implicit_violation, 1};
    const Scenario d{"d", "x", std::nullopt, ScenarioKind::compliant, 0};
    CHECK(sim.scenarios(a, b) == 1.0);
    CHECK(sim.scenarios(a, c) == 0.0);
    CHECK(sim.scenarios(a, d) == 0.0);
}

TEST_CASE("embedding similarity degrades to lexical when the endpoint fails") {
    struct Broken : Embedder {
        std::vector<double> embed(const ModelRef&, std::string_view) override {
            throw EmbeddingBackendUnavailable("down");
        }
    };
    struct Fixed : Embedder {
        std::vector<double> embed(const ModelRef&, std::string_view t) override {
            return t == "a" ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
        }
    };
    EmbeddingSimilarity broken(std::make_shared<Broken>(), ModelRef{});
    CHECK(broken.text("same words", "same words") == 1.0);
    CHECK_FALSE(broken.degraded());  // identical texts never reach the embedder
    CHECK(broken.text("eats on the train", "eats on the bus") ==
          doctest::Approx(LexicalSimilarity{}.text("eats on the train", "eats on the bus")));
    CHECK(broken.degraded());
    EmbeddingSimilarity fixed(std::make_shared<Fixed>(), ModelRef{});
    CHECK(fixed.text("a", "a") == doctest::Approx(1.0));
    CHECK(fixed.text("a", "b") == doctest::Approx(0.5));
    CHECK_FALSE(fixed.degraded());
}

TEST_CASE("deliberation on the worked example") {
    Fixture f;
    const Scenario x{"law-sg-1", kSarah, "rts-m1", ScenarioKind::implicit_violation, 1};
    const auto v = deliberate(x, f.corpus, f.pool, f.registry, f.sim);
    CHECK(v.demonstration_id == "rts-m1-s1-r1");
    REQUIRE(v.votes.size() == 3);
    CHECK(v.votes[0].juror_id == "J3");
    CHECK(v.votes[1].juror_id == "J4");
    CHECK(v.votes[2].juror_id == "J5");
    CHECK(v.votes[0].parsed == Answer::yes);
    CHECK(v.votes[1].parsed == Answer::yes);
    CHECK(v.votes[2].parsed == Answer::no);
    CHECK(v.outcome);
    CHECK(v.yes_fraction == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(v.flagged);
    CHECK(verdict_from_json(nlohmann::json::parse(verdict_to_json(v).dump())) == v);
}

TEST_CASE("deliberation options") {
    Fixture f;
    const Scenario x{"law-sg-1", kSarah, "rts-m1", ScenarioKind::implicit_violation, 1};

    DeliberationOptions strict;
    strict.theta = 0.7;
    CHECK_FALSE(deliberate(x, f.corpus, f.pool, f.registry, f.sim, strict).outcome);

    DeliberationOptions no_demo;
    no_demo.use_demos = false;
    const auto nd = deliberate(x, f.corpus, f.pool, f.registry, f.sim, no_demo);
    CHECK_FALSE(nd.demonstration_used);
    for (const auto& vote : nd.votes) CHECK_FALSE(vote.used_demonstration);

    DeliberationOptions far;
    far.min_similarity = 0.99;
    CHECK_FALSE(deliberate(x, f.corpus, f.pool, f.registry, f.sim, far).demonstration_used);

    DeliberationOptions five;
    five.jury_size = 5;
    CHECK(deliberate(x, f.corpus, f.pool, f.registry, f.sim, five).votes.size() == 5);
    DeliberationOptions seven;
    seven.jury_size = 7;
    CHECK_THROWS_AS(deliberate(x, f.corpus, f.pool, f.registry, f.sim, seven), KTooLarge);
}

TEST_CASE("unparseable votes flag the verdict") {
    Fixture f;
    const Scenario x{"law-sg-3",
                     "Waiting for the last train, Ken cupped his lighter and drew on a cigarette behind the platform "
                     "pillar.",
                     "rts-m2", ScenarioKind::implicit_violation, 1};
    const auto v = deliberate(x, f.corpus, f.pool, f.registry, f.sim);
    CHECK(v.demonstration_id == "rts-m2-s1-r1");
    CHECK(v.flagged);
    CHECK(v.outcome);
}

}  // TEST_SUITE
