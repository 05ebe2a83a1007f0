#include <doctest.h>

#include <filesystem>

#include "autolaw/detector.hpp"
#include "autolaw/error.hpp"
#include "autolaw/prompts.hpp"
#include "oracles.hpp"

using namespace autolaw;
namespace fs = std::filesystem;

namespace {

const fs::path kGolden(AUTOLAW_GOLDEN_DIR);

const std::string kRegulation = "Rapid Transit Systems Regulations";
const std::string kMisconduct = "Consuming food or drinks except in designated areas.";
const std::string kInput =
    "Sarah quickly unwrapped her sandwich and took a bite on the train due to a medical condition that required "
    "her to eat immediately.";
const std::string kCase =
    "A commuter sneaks a quick bite of a sandwich while riding the train, trying to discreetly finish their meal "
    "before reaching their destination.";

Juror juror(Role role) { return Juror{"J3", role, ModelRef{"offline", "Qwen2.5", {}}, false}; }

CaseLawRecord demo() {
    return {Scenario{"rts-m1-s1-r1", kCase, "rts-m1", ScenarioKind::implicit_violation, 1},
            Misconduct{"rts-m1", "rts", kMisconduct}, Regulation{"rts", kRegulation, "", 24, 31}};
}

}  // namespace

TEST_SUITE("prompts") {

TEST_CASE("rendered templates byte-match the transcribed goldens") {
    CHECK(render(prompt_template(TemplateName::direct_scenario),
                 {{"regulation", kRegulation}, {"misconduct", kMisconduct}}) ==
          oracle::slurp(kGolden / "direct_scenario.txt"));
    CHECK(render(prompt_template(TemplateName::cot_detection), {{"scenario", kInput}}) ==
          oracle::slurp(kGolden / "cot_detection.txt"));
    CHECK(render(prompt_template(TemplateName::jury_ranking),
                 {{"context", "No person shall consume any food or drink on the train."},
                  {"scenario", kCase},
                  {"regulation", kRegulation},
                  {"misconduct", kMisconduct},
                  {"label", "the following answers: (0) Yes, (1) No"}}) ==
          oracle::slurp(kGolden / "jury_ranking.txt"));
    CHECK(render(prompt_template(TemplateName::jury_vote),
                 {{"misconduct", kMisconduct}, {"scenario_", kCase}, {"scenario", kInput}}) ==
          oracle::slurp(kGolden / "jury_vote.txt"));
}

TEST_CASE("placeholders of each template") {
    using S = std::set<std::string>;
    CHECK(prompt_template(TemplateName::direct_scenario).placeholders() == S{"misconduct", "regulation"});
    CHECK(prompt_template(TemplateName::cot_detection).placeholders() == S{"scenario"});
    CHECK(prompt_template(TemplateName::jury_ranking).placeholders() ==
          S{"context", "label", "misconduct", "regulation", "scenario"});
    CHECK(prompt_template(TemplateName::jury_vote).placeholders() == S{"misconduct", "scenario", "scenario_"});
    CHECK(all_templates().size() == 7);
    for (auto n : all_templates()) CHECK(template_name_from_string(to_string(n)) == n);
}

TEST_CASE("render is strict about bindings and does not rescan substitutions") {
    const auto& t = prompt_template(TemplateName::cot_detection);
    CHECK_THROWS_AS(render(t, {}), MissingBinding);
    CHECK_THROWS_AS(render(t, {{"scenario", "x"}, {"extra", "y"}}), UnknownPlaceholder);
    const auto out = render(t, {{"scenario", "{scenario} and {regulation}"}});
    CHECK(out.starts_with("Scenario: {scenario} and {regulation}\n"));
}

TEST_CASE("persona prefixes") {
    CHECK(persona_prefix(Role::Judge).find("judge") != std::string_view::npos);
    CHECK(persona_prefix(Role::Lawyer).find("lawyer") != std::string_view::npos);
    CHECK(persona_prefix(Role::Prosecutor).find("prosecutor") != std::string_view::npos);
}

TEST_CASE("parse_answer reads the separator format") {
    CHECK(parse_answer("Because...\n#### Answer: Yes") == Answer::yes);
    CHECK(parse_answer("#### Answer: No") == Answer::no);
    CHECK(parse_answer("#### answer: yes.") == Answer::yes);
    CHECK(parse_answer("#### **No**") == Answer::no);
    CHECK(parse_answer("#### Answer: Yes\nmore\n#### Answer: No") == Answer::no);
    CHECK(parse_answer("Thinking it over.\nAnswer: Yes") == Answer::yes);
    CHECK(parse_answer("No") == Answer::no);
    CHECK(parse_answer("") == Answer::unparseable);
    CHECK(parse_answer("It is hard to say without more facts.") == Answer::unparseable);
    CHECK(parse_answer("#### Maybe") == Answer::unparseable);
    CHECK(parse_answer("#### Answer: Yesterday") == Answer::unparseable);
}

TEST_CASE("canonical answers round-trip") {
    for (auto a : {Answer::yes, Answer::no}) {
        CHECK(parse_answer(canonical_answer(a)) == a);
        CHECK(answer_from_string(to_string(a)) == a);
    }
    CHECK(canonical_answer(Answer::yes) == "#### Answer: Yes");
    CHECK(canonical_answer(Answer::no) == "#### Answer: No");
}

TEST_CASE("parse_answer is total on large and binary input") {
    std::string big(1 << 20, 'x');
    CHECK(parse_answer(big) == Answer::unparseable);
    std::string hashes(1 << 20, '#');
    CHECK(parse_answer(hashes) == Answer::unparseable);
    std::string binary;
    for (int i = 0; i < 4096; ++i) binary.push_back(static_cast<char>(i * 131 % 256));
    CHECK_NOTHROW(parse_answer(binary));
    CHECK(parse_answer(big + "\n#### Answer: Yes") == Answer::yes);
}

TEST_CASE("detection messages with and without roles and demonstrations") {
    const Scenario x{"law-sg-1", kInput, "rts-m1", ScenarioKind::implicit_violation, 1};
    const auto d = demo();
    const auto full = detection_messages(x, juror(Role::Lawyer), &d, {true});
    REQUIRE(full.size() == 2);
    CHECK(full[0].role == MessageRole::system);
    CHECK(full[0].content == persona_prefix(Role::Lawyer));
    CHECK(full[1].content == oracle::slurp(kGolden / "jury_vote.txt"));

    const auto bare = detection_messages(x, juror(Role::Lawyer), nullptr, {false});
    REQUIRE(bare.size() == 1);
    CHECK(bare[0].role == MessageRole::user);
    CHECK(bare[0].content == oracle::slurp(kGolden / "cot_detection.txt"));
}

TEST_CASE("detect parses the juror's reply and records the demonstration") {
    BackendRegistry reg;
    auto b = std::make_shared<ScriptedBackend>();
    b->add_rule({std::nullopt, "*judge*Example:*", "Demo seen.\n#### Answer: Yes"});
    b->add_rule({std::nullopt, "*Example:*", "#### Answer: No"});
    b->set_default("unclear");
    reg.add("offline", b);
    const Scenario x{"law-sg-1", kInput, "rts-m1", ScenarioKind::implicit_violation, 1};
    const auto d = demo();

    const auto v = detect(x, juror(Role::Judge), &d, reg);
    CHECK(v.parsed == Answer::yes);
    CHECK(v.juror_id == "J3");
    CHECK(v.used_demonstration == std::optional<std::string>("rts-m1-s1-r1"));
    CHECK(detect(x, juror(Role::Judge), &d, reg, {false}).parsed == Answer::no);
    const auto u = detect(x, juror(Role::Judge), nullptr, reg);
    CHECK(u.parsed == Answer::unparseable);
    CHECK_FALSE(u.used_demonstration);
}

}  // TEST_SUITE
