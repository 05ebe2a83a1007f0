#include <doctest.h>

#include <filesystem>

#include "autolaw/casegen.hpp"
#include "autolaw/error.hpp"
#include "autolaw/juryrank.hpp"
#include "oracles.hpp"

using namespace autolaw;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(AUTOLAW_DATA_DIR) / "fixtures";

ModelRef m(const char* name) { return ModelRef{"offline", name, {}}; }

GenerationConfig gen_config() { return GenerationConfig{m("Generator"), m("Target"), m("Verifier")}; }

const Regulation kReg{"rts", "Rapid Transit Systems Regulations", "12. No eating.\n13. No smoking.", 24, 31};
const Misconduct kEat{"rts-m1", "rts", "Consuming food or drinks except in designated areas."};

Scenario seed(const std::string& id, const std::string& text) {
    return Scenario{id, text, kEat.id, ScenarioKind::explicit_violation, 0};
}

std::string last_user(std::span<const Message> msgs) { return msgs.back().content; }

// Generator rewrites "X" into "X'" so the round is visible in the text; the
// target misses any text containing "evade" after one rewrite.
std::shared_ptr<ScriptedBackend> refinement_world(bool preserve = true) {
    auto b = std::make_shared<ScriptedBackend>();
    b->add_handler([preserve](const ModelRef& model, std::span<const Message> msgs) -> std::optional<std::string> {
        const auto prompt = last_user(msgs);
        if (model.model_name == "Generator") {
            const auto at = prompt.find("Scenario: ");
            const auto end = prompt.find('\n', at);
            return prompt.substr(at + 10, end - at - 10) + "'";
        }
        if (model.model_name == "Target")
            return prompt.find("evade'") != std::string::npos ? "#### Answer: No" : "#### Answer: Yes";
        if (model.model_name == "Verifier") return preserve ? "#### Answer: Yes" : "#### Answer: No";
        return std::nullopt;
    });
    return b;
}

BackendRegistry registry_of(std::shared_ptr<Backend> b) {
    BackendRegistry r;
    r.add("offline", std::move(b));
    return r;
}

}  // namespace

TEST_SUITE("casegen") {

TEST_CASE("misconduct list parsing") {
    const auto items = parse_misconduct_list(
        "Here is the list:\n- Eating on trains.\n* Smoking.\n\xE2\x80\xA2 Littering.\n4. Spitting.\n5) Busking.\n"
        "- eating on trains.\n-\nPlain prose line.");
    CHECK(items == std::vector<std::string>{"Eating on trains.", "Smoking.", "Littering.", "Spitting.", "Busking."});
    CHECK(parse_misconduct_list("no list here").empty());
}

TEST_CASE("extraction assigns ids in reply order") {
    auto reg = registry_of(ScriptedBackend::from_file(kFixtures / "scripted_rules.jsonl"));
    const auto ms = extract_misconducts(kReg, m("Generator"), reg);
    REQUIRE(ms.size() == 2);
    CHECK(ms[0].id == "rts-m1");
    CHECK(ms[0].description == "Consuming food or drinks except in designated areas.");
    CHECK(ms[1].id == "rts-m2");
    CHECK(ms[1].regulation_id == "rts");

    Regulation empty = kReg;
    empty.body.clear();
    CHECK_THROWS_AS(extract_misconducts(empty, m("Generator"), reg), std::invalid_argument);
    auto prose = std::make_shared<ScriptedBackend>();
    prose->set_default("I could not find anything.");
    CHECK_THROWS_AS(extract_misconducts(kReg, m("Generator"), registry_of(prose)), UnparseableExtraction);
}

TEST_CASE("explicit generation") {
    auto reg = registry_of(ScriptedBackend::from_file(kFixtures / "scripted_rules.jsonl"));
    const auto s = generate_explicit(kEat, kReg, m("Generator"), reg, "rts-m1-s1");
    CHECK(s.id == "rts-m1-s1");
    CHECK(s.kind == ScenarioKind::explicit_violation);
    CHECK(s.refinement_round == 0);
    CHECK(s.misconduct_id == std::optional<std::string>("rts-m1"));
    CHECK(s.text.starts_with("A passenger eats"));
    auto blank = std::make_shared<ScriptedBackend>();
    blank->set_default("   \n ");
    CHECK_THROWS_AS(generate_explicit(kEat, kReg, m("Generator"), registry_of(blank), "x"), EmptyResponse);
}

TEST_CASE("attack success rate equals the constructed evadable fraction") {
    auto reg = registry_of(refinement_world());
    std::vector<RefinementTrace> traces;
    for (int i = 0; i < 20; ++i) {
        const std::string text = i < 14 ? "seed " + std::to_string(i) + " evade" : "seed " + std::to_string(i) + " plain";
        traces.push_back(refine_adversarial(seed("s" + std::to_string(i), text), kEat, kReg, gen_config(), reg));
    }
    CHECK(attack_success_rate(traces) == doctest::Approx(0.70));
    for (int i = 0; i < 14; ++i) {
        CHECK(traces[i].outcome == RefinementOutcome::evaded);
        CHECK(traces[i].rounds.size() == 1);
        const auto e = traces[i].evading_scenario();
        REQUIRE(e);
        CHECK(e->id == "s" + std::to_string(i) + "-r1");
        CHECK(e->kind == ScenarioKind::implicit_violation);
        CHECK(e->refinement_round == 1);
    }
    CHECK_THROWS_AS(attack_success_rate({}), EmptyInput);
}

TEST_CASE("refinement exhausts after max_rounds") {
    auto b = refinement_world();
    auto reg = registry_of(b);
    const auto t = refine_adversarial(seed("s", "stubborn"), kEat, kReg, gen_config(), reg);
    CHECK(t.outcome == RefinementOutcome::exhausted);
    REQUIRE(t.rounds.size() == 5);
    CHECK_FALSE(t.evading_scenario());
    // Each round rewrites the previous candidate.
    CHECK(t.rounds[4].candidate.text == "stubborn'''''");
    CHECK(t.rounds[4].candidate.id == "s-r5");
    CHECK(b->outbound_requests() == 15);

    auto cfg = gen_config();
    cfg.max_rounds = 2;
    CHECK(refine_adversarial(seed("s", "stubborn"), kEat, kReg, cfg, reg).rounds.size() == 2);
    cfg.max_rounds = 0;
    CHECK_THROWS_AS(refine_adversarial(seed("s", "x"), kEat, kReg, cfg, reg), std::invalid_argument);
}

TEST_CASE("rewrites that lose the violation never count and are not built upon") {
    auto reg = registry_of(refinement_world(false));
    const auto t = refine_adversarial(seed("s", "evade"), kEat, kReg, gen_config(), reg);
    CHECK(t.outcome == RefinementOutcome::exhausted);
    for (const auto& r : t.rounds) {
        CHECK_FALSE(r.violation_preserved);
        CHECK(r.candidate.text == "evade'");
    }
    auto unchecked = gen_config();
    unchecked.check_preservation = false;
    CHECK(refine_adversarial(seed("s", "evade"), kEat, kReg, unchecked, reg).outcome == RefinementOutcome::evaded);
}

TEST_CASE("backend failures inside a round carry the round number") {
    auto b = std::make_shared<ScriptedBackend>();
    int calls = 0;
    b->add_handler([&](const ModelRef& model, std::span<const Message>) -> std::optional<std::string> {
        if (model.model_name == "Generator") return ++calls >= 3 ? "" : "rewrite";
        return "#### Answer: Yes";
    });
    auto reg = registry_of(b);
    try {
        refine_adversarial(seed("s", "x"), kEat, kReg, gen_config(), reg);
        FAIL("expected RoundError");
    } catch (const RoundError& e) {
        CHECK(e.round() == 3);
    }
    CHECK_THROWS_AS(refine_adversarial(Scenario{"i", "x", "rts-m1", ScenarioKind::implicit_violation, 1}, kEat, kReg,
                                       gen_config(), reg),
                    std::invalid_argument);
}

TEST_CASE("corpus build on the fixtures yields the worked-example record") {
    auto reg = registry_of(ScriptedBackend::from_file(kFixtures / "scripted_rules.jsonl"));
    const auto pool = load_pool(kFixtures / "pool.jsonl");
    CorpusBuildOptions opts;
    opts.generation = gen_config();
    const std::vector<Regulation> regs{kReg};
    const auto out = build_corpus(regs, pool, opts, reg);
    CHECK(out.complete);
    CHECK(out.misconducts.size() == 2);
    CHECK(out.explicit_seeds.size() == 2);
    CHECK(out.traces.size() == 2);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0].record.scenario.id == "rts-m1-s1-r1");
    CHECK(out.records[0].jury() == std::vector<std::string>{"J3", "J4", "J5"});
    CHECK(out.traces[1].outcome == RefinementOutcome::exhausted);
    CHECK(out.traces[1].rounds.size() == 5);
}

TEST_CASE("duplicate seeds are dropped") {
    auto b = std::make_shared<ScriptedBackend>();
    b->add_rule({std::string("Generator"), "*List every*", "- Eating."});
    b->add_rule({std::string("Generator"), "*Generate a real-life*", "Same scenario every time."});
    b->add_rule({std::string("Generator"), "*Rewrite*", "Hidden."});
    b->add_rule({std::string("Target"), "*", "#### Answer: No"});
    b->add_rule({std::string("Verifier"), "*still involve*", "#### Answer: Yes"});
    b->add_rule({std::string("Verifier"), "*", "#### [(0, 0.1), (1, 0.2), (2, 0.3), (3, 0.4), (4, 0.5), (5, 0.6)]"});
    b->set_default("#### Answer: Yes");
    auto reg = registry_of(b);
    CorpusBuildOptions opts;
    opts.generation = gen_config();
    opts.seeds_per_misconduct = 3;
    const std::vector<Regulation> regs{kReg};
    const auto out = build_corpus(regs, load_pool(kFixtures / "pool.jsonl"), opts, reg);
    CHECK(out.explicit_seeds.size() == 1);
    CHECK(out.records.size() == 1);
}

TEST_CASE("an interrupted build resumes from its store") {
    const auto dir = fs::temp_directory_path() / "autolaw-test-resume";
    fs::remove_all(dir);
    fs::create_directories(dir);
    // Two misconducts that both evade on the first rewrite.
    auto make_backend = [] {
        auto b = std::make_shared<ScriptedBackend>();
        b->add_rule({std::string("Generator"), "*List every*", "- Eating.\n- Smoking."});
        b->add_rule({std::string("Generator"), "*Misconduct: Eating.*Generate a real-life*", "He eats."});
        b->add_rule({std::string("Generator"), "*Misconduct: Smoking.*Generate a real-life*", "He smokes."});
        b->add_rule({std::string("Generator"), "*Scenario: He eats.*", "He nibbles."});
        b->add_rule({std::string("Generator"), "*Scenario: He smokes.*", "He puffs."});
        b->add_rule({std::string("Target"), "*", "#### Answer: No"});
        b->add_rule({std::string("Verifier"), "*still involve*", "#### Answer: Yes"});
        b->add_rule(
            {std::string("Verifier"), "*", "#### [(0, 0.1), (1, 0.2), (2, 0.3), (3, 0.4), (4, 0.5), (5, 0.6)]"});
        b->set_default("#### Answer: Yes");
        return b;
    };
    const auto pool = load_pool(kFixtures / "pool.jsonl");
    const std::vector<Regulation> regs{kReg};
    CorpusBuildOptions opts;
    opts.generation = gen_config();
    opts.store = dir / "store.jsonl";
    opts.max_records = 1;

    auto first_backend = make_backend();
    auto first_reg = registry_of(first_backend);
    const auto first = build_corpus(regs, pool, opts, first_reg);
    CHECK_FALSE(first.complete);
    CHECK(first.records.size() == 1);
    CHECK(records_of<JuryMatchedRecord>(load_store(*opts.store)).size() == 1);

    opts.max_records.reset();
    auto second_backend = make_backend();
    auto second_reg = registry_of(second_backend);
    const auto second = build_corpus(regs, pool, opts, second_reg);
    CHECK(second.complete);
    REQUIRE(second.records.size() == 2);
    CHECK(second.records[0] == first.records[0]);
    const auto stored = load_store(*opts.store);
    CHECK(records_of<JuryMatchedRecord>(stored).size() == 2);
    CHECK(records_of<Misconduct>(stored).size() == 2);
    CHECK(records_of<Regulation>(stored).size() == 1);
    CHECK(validate_referential_integrity(stored).empty());
    // First run: extraction 1, seeds 2, refinement 2 x 3, one ranking (6 answers + 1 verifier).
    CHECK(first_backend->outbound_requests() == 16);
    // Second run: no extraction and only the missing record is ranked.
    CHECK(second_backend->outbound_requests() == 15);
}

}  // TEST_SUITE
