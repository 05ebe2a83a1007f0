#include "autolaw/juryrank.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "autolaw/error.hpp"
#include "autolaw/log.hpp"
#include "autolaw/parallel.hpp"
#include "autolaw/prompts.hpp"

namespace autolaw {

std::vector<Vote> collect_answers(const CaseLawRecord& case_law, const JuryPool& pool, const BackendRegistry& backends,
                                  std::size_t max_concurrency) {
    pool.validate();
    std::vector<Vote> votes(pool.size());
    parallel_for(pool.size(), max_concurrency, [&](std::size_t i) {
        const auto& juror = pool.jurors[i];
        try {
            votes[i] = detect(case_law.scenario, juror, nullptr, backends);
        } catch (const Error& e) {
            log::warn("juror " + juror.id + " failed on " + case_law.scenario.id + ": " + e.what());
            votes[i] = Vote{juror.id, std::string{}, Answer::unparseable, std::nullopt};
        }
    });
    return votes;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Last non-empty line of the reasoning that precedes the answer separator.
std::string rationale(std::string_view raw) {
    if (auto sep = raw.rfind("####"); sep != std::string_view::npos) raw = raw.substr(0, sep);
    raw = trim(raw);
    if (auto nl = raw.rfind('\n'); nl != std::string_view::npos) raw = trim(raw.substr(nl + 1));
    constexpr std::size_t kMax = 200;
    std::string out(raw.substr(0, kMax));
    if (raw.size() > kMax) out += "...";
    return out;
}

}  // namespace

std::string answer_list_label(const std::vector<Vote>& answers) {
    std::string label = "the following answers:";
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const auto& v = answers[i];
        label += "\n(" + std::to_string(i) + ") Answer: ";
        switch (v.parsed) {
            case Answer::yes: label += "Yes"; break;
            case Answer::no: label += "No"; break;
            case Answer::unparseable: label += "None"; break;
        }
        if (auto why = rationale(v.raw_response); !why.empty()) label += ". Reason: " + why;
    }
    return label;
}

std::string render_ranking_prompt(const CaseLawRecord& case_law, const std::vector<Vote>& answers) {
    const std::string context =
        case_law.regulation.body.empty() ? case_law.regulation.title : case_law.regulation.body;
    return render(prompt_template(TemplateName::jury_ranking), {{"context", context},
                                                                {"scenario", case_law.scenario.text},
                                                                {"regulation", case_law.regulation.title},
                                                                {"misconduct", case_law.misconduct.description},
                                                                {"label", answer_list_label(answers)}});
}

std::optional<std::vector<double>> parse_score_array(std::string_view raw, std::size_t n) {
    const auto sep = raw.rfind("####");
    if (sep == std::string_view::npos) return std::nullopt;
    std::string_view s = raw.substr(sep + 4);

    std::vector<std::optional<double>> scores(n);
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    };
    while ((i = s.find('(', i)) != std::string_view::npos) {
        ++i;
        skip_ws();
        long long index = -1;
        auto r1 = std::from_chars(s.data() + i, s.data() + s.size(), index);
        if (r1.ec != std::errc{}) continue;
        i = static_cast<std::size_t>(r1.ptr - s.data());
        skip_ws();
        if (i >= s.size() || s[i] != ',') continue;
        ++i;
        skip_ws();
        double score = 0;
        auto r2 = std::from_chars(s.data() + i, s.data() + s.size(), score);
        if (r2.ec != std::errc{}) continue;
        i = static_cast<std::size_t>(r2.ptr - s.data());
        skip_ws();
        if (i >= s.size() || s[i] != ')') continue;
        if (index < 0 || static_cast<std::size_t>(index) >= n || !std::isfinite(score)) continue;
        scores[static_cast<std::size_t>(index)] = std::clamp(score, 0.0, 1.0);
    }
    std::vector<double> out;
    out.reserve(n);
    for (const auto& sc : scores) {
        if (!sc) return std::nullopt;
        out.push_back(*sc);
    }
    return out;
}

VerifierOutcome score_with_verifier(const CaseLawRecord& case_law, const std::vector<Vote>& answers,
                                    const ModelRef& verifier, const BackendRegistry& backends) {
    if (answers.empty()) throw EmptyInput("score_with_verifier needs at least one answer");
    const std::vector<Message> messages{{MessageRole::user, render_ranking_prompt(case_law, answers)}};

    VerifierOutcome out;
    for (int attempt = 1; attempt <= 2; ++attempt) {
        out.attempts = attempt;
        // A retry must not be served the same reply by a replay cache.
        ModelRef model = verifier;
        if (attempt > 1) model.decode.seed = model.decode.seed.value_or(0) + attempt - 1;
        const std::string reply = backends.complete(model, messages);
        if (auto parsed = parse_score_array(reply, answers.size())) {
            for (std::size_t i = 0; i < answers.size(); ++i) out.scores.push_back({answers[i].juror_id, (*parsed)[i]});
            return out;
        }
    }
    log::warn("UNPARSEABLE VERIFIER SCORES for " + case_law.scenario.id +
              " after retry; using uniform 0.5 (jury order falls back to pool order)");
    out.fallback = true;
    for (const auto& a : answers) out.scores.push_back({a.juror_id, 0.5});
    return out;
}

std::vector<std::size_t> select_jury_indices(const ScoreVector& scores, std::size_t k) {
    if (k == 0 || k > scores.size()) throw KTooLarge(k, scores.size());
    auto order = rank_order(scores);
    order.resize(k);
    return order;
}

std::vector<Juror> select_jury(const ScoreVector& scores, const JuryPool& pool, std::size_t k) {
    std::vector<Juror> out;
    for (auto i : select_jury_indices(scores, k)) out.push_back(pool.find(scores[i].juror_id));
    return out;
}

JuryMatchedRecord rank_case(const CaseLawRecord& case_law, const JuryPool& pool, const ModelRef& verifier,
                            std::size_t k, const BackendRegistry& backends) {
    if (k == 0 || k > pool.size()) throw KTooLarge(k, pool.size());
    auto answers = collect_answers(case_law, pool, backends);
    auto outcome = score_with_verifier(case_law, answers, verifier, backends);
    return make_matched_record(case_law, std::move(outcome.scores), k);
}

JuryPool load_pool(const std::filesystem::path& path) {
    JuryPool pool{records_of<Juror>(load_store(path))};
    pool.validate();
    return pool;
}

void save_pool(const std::filesystem::path& path, const JuryPool& pool) {
    save_store(path, to_records(pool.jurors));
}

}  // namespace autolaw
