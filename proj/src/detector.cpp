#include "autolaw/detector.hpp"

#include <cctype>
#include <stdexcept>

#include "autolaw/log.hpp"
#include "autolaw/prompts.hpp"

namespace autolaw {
namespace {

bool is_noise(char c) {
    // Whitespace and the markup models like to wrap answers in.
    return std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '_' || c == '`' || c == '#' ||
           c == ':' || c == '-' || c == '>' || c == '"' || c == '\'' || c == '[' || c == '(';
}

bool istarts_with(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    return true;
}

std::string_view skip_noise(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && is_noise(s[i])) ++i;
    return s.substr(i);
}

// Matches [noise] [answer [noise]] (yes|no) followed by a word boundary.
Answer match_answer(std::string_view s) {
    s = skip_noise(s);
    if (istarts_with(s, "answer")) s = skip_noise(s.substr(6));
    auto word_end = [&](std::size_t n) {
        return s.size() == n || !std::isalnum(static_cast<unsigned char>(s[n]));
    };
    if (istarts_with(s, "yes") && word_end(3)) return Answer::yes;
    if (istarts_with(s, "no") && word_end(2)) return Answer::no;
    return Answer::unparseable;
}

}  // namespace

std::string_view to_string(Answer a) {
    switch (a) {
        case Answer::yes: return "yes";
        case Answer::no: return "no";
        case Answer::unparseable: return "unparseable";
    }
    return "unparseable";
}

Answer answer_from_string(std::string_view s) {
    if (s == "yes") return Answer::yes;
    if (s == "no") return Answer::no;
    if (s == "unparseable") return Answer::unparseable;
    throw std::invalid_argument("unknown answer: " + std::string(s));
}

Answer parse_answer(std::string_view raw) noexcept {
    if (const auto sep = raw.rfind("####"); sep != std::string_view::npos) {
        return match_answer(raw.substr(sep + 4));
    }
    std::size_t end = raw.size();
    while (end > 0) {
        while (end > 0 && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
        if (end == 0) break;
        const auto nl = raw.rfind('\n', end - 1);
        const std::size_t begin = nl == std::string_view::npos ? 0 : nl + 1;
        return match_answer(raw.substr(begin, end - begin));
    }
    return Answer::unparseable;
}

std::string canonical_answer(Answer a) {
    if (a == Answer::unparseable) throw std::invalid_argument("no canonical form for an unparseable answer");
    return a == Answer::yes ? "#### Answer: Yes" : "#### Answer: No";
}

void to_json(nlohmann::json& j, const Vote& v) {
    j = nlohmann::json{{"juror_id", v.juror_id}, {"raw_response", v.raw_response}, {"parsed", to_string(v.parsed)}};
    if (v.used_demonstration) j["used_demonstration"] = *v.used_demonstration;
}

void from_json(const nlohmann::json& j, Vote& v) {
    j.at("juror_id").get_to(v.juror_id);
    j.at("raw_response").get_to(v.raw_response);
    v.parsed = answer_from_string(j.at("parsed").get<std::string>());
    v.used_demonstration.reset();
    if (j.contains("used_demonstration")) v.used_demonstration = j.at("used_demonstration").get<std::string>();
}

std::vector<Message> detection_messages(const Scenario& scenario, const Juror& juror,
                                        const CaseLawRecord* demonstration, const DetectOptions& opts) {
    std::string prompt;
    if (demonstration) {
        prompt = render(prompt_template(TemplateName::jury_vote), {{"misconduct", demonstration->misconduct.description},
                                                                   {"scenario_", demonstration->scenario.text},
                                                                   {"scenario", scenario.text}});
    } else {
        prompt = render(prompt_template(TemplateName::cot_detection), {{"scenario", scenario.text}});
    }
    std::vector<Message> messages;
    if (opts.use_roles) messages.push_back({MessageRole::system, std::string(persona_prefix(juror.role))});
    messages.push_back({MessageRole::user, std::move(prompt)});
    return messages;
}

Vote detect(const Scenario& scenario, const Juror& juror, const CaseLawRecord* demonstration,
            const BackendRegistry& backends, const DetectOptions& opts) {
    const auto messages = detection_messages(scenario, juror, demonstration, opts);
    Vote vote;
    vote.juror_id = juror.id;
    vote.raw_response = backends.complete(juror.model, messages);
    vote.parsed = parse_answer(vote.raw_response);
    if (demonstration) vote.used_demonstration = demonstration->scenario.id;
    if (vote.parsed == Answer::unparseable)
        log::warn("unparseable vote from juror " + juror.id + " on scenario " + scenario.id + "; counted as no");
    return vote;
}

}  // namespace autolaw
