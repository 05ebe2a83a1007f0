#include "autolaw/casegen.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <stdexcept>

#include "autolaw/detector.hpp"
#include "autolaw/error.hpp"
#include "autolaw/juryrank.hpp"
#include "autolaw/log.hpp"
#include "autolaw/parallel.hpp"
#include "autolaw/prompts.hpp"

namespace autolaw {

void GenerationConfig::validate() const {
    if (max_rounds < 1) throw std::invalid_argument("max_rounds must be at least 1");
}

std::string_view to_string(RefinementOutcome o) { return o == RefinementOutcome::evaded ? "evaded" : "exhausted"; }

std::optional<Scenario> RefinementTrace::evading_scenario() const {
    if (outcome != RefinementOutcome::evaded || rounds.empty()) return std::nullopt;
    return rounds.back().candidate;
}

nlohmann::ordered_json trace_to_json(const RefinementTrace& t) {
    nlohmann::ordered_json j;
    j["seed_id"] = t.seed.id;
    j["outcome"] = to_string(t.outcome);
    nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
    for (const auto& r : t.rounds) {
        nlohmann::ordered_json e;
        e["scenario_id"] = r.candidate.id;
        e["round"] = r.candidate.refinement_round;
        e["target_detected"] = r.target_detected;
        e["violation_preserved"] = r.violation_preserved;
        e["text"] = r.candidate.text;
        rounds.push_back(std::move(e));
    }
    j["rounds"] = std::move(rounds);
    return j;
}

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Strips a list marker; returns nothing for lines that are not list items.
std::optional<std::string> list_item(std::string_view line) {
    std::string t = trim(line);
    std::string_view s = t;
    if (s.starts_with("- ") || s.starts_with("* ")) {
        s.remove_prefix(2);
    } else if (s.starts_with("\xE2\x80\xA2")) {  // U+2022 bullet
        s.remove_prefix(3);
    } else {
        std::size_t i = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == 0 || i >= s.size() || (s[i] != '.' && s[i] != ')')) return std::nullopt;
        s.remove_prefix(i + 1);
    }
    std::string item = trim(s);
    if (item.empty()) return std::nullopt;
    return item;
}

std::string ask(const BackendRegistry& backends, const ModelRef& model, std::string prompt) {
    const std::vector<Message> messages{{MessageRole::user, std::move(prompt)}};
    return backends.complete(model, messages);
}

}  // namespace

std::vector<std::string> parse_misconduct_list(std::string_view raw) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::size_t start = 0;
    while (start <= raw.size()) {
        std::size_t end = raw.find('\n', start);
        if (end == std::string_view::npos) end = raw.size();
        if (auto item = list_item(raw.substr(start, end - start)); item && seen.insert(lower(*item)).second)
            out.push_back(std::move(*item));
        start = end + 1;
    }
    return out;
}

std::vector<Misconduct> extract_misconducts(const Regulation& regulation, const ModelRef& generator,
                                            const BackendRegistry& backends) {
    if (regulation.body.empty())
        throw std::invalid_argument("regulation " + regulation.id + " has no body to extract from");
    const auto prompt = render(prompt_template(TemplateName::misconduct_extraction),
                               {{"regulation", regulation.title}, {"body", regulation.body}});
    const auto items = parse_misconduct_list(ask(backends, generator, prompt));
    if (items.empty())
        throw UnparseableExtraction("no misconduct list found in the reply for regulation " + regulation.id);
    std::vector<Misconduct> out;
    for (std::size_t i = 0; i < items.size(); ++i)
        out.push_back({regulation.id + "-m" + std::to_string(i + 1), regulation.id, items[i]});
    return out;
}

Scenario generate_explicit(const Misconduct& misconduct, const Regulation& regulation, const ModelRef& generator,
                           const BackendRegistry& backends, std::string scenario_id) {
    const auto prompt = render(prompt_template(TemplateName::direct_scenario),
                               {{"regulation", regulation.title}, {"misconduct", misconduct.description}});
    auto text = trim(ask(backends, generator, prompt));
    if (text.empty()) throw EmptyResponse("generator returned only whitespace for " + misconduct.id);
    return Scenario{std::move(scenario_id), std::move(text), misconduct.id, ScenarioKind::explicit_violation, 0};
}

bool target_detects(const Scenario& scenario, const ModelRef& target, const BackendRegistry& backends) {
    const auto prompt = render(prompt_template(TemplateName::cot_detection), {{"scenario", scenario.text}});
    return parse_answer(ask(backends, target, prompt)) != Answer::no;
}

namespace {

bool violation_preserved(const Scenario& candidate, const Misconduct& misconduct, const Regulation& regulation,
                         const ModelRef& verifier, const BackendRegistry& backends) {
    const auto prompt = render(prompt_template(TemplateName::violation_check),
                               {{"regulation", regulation.title},
                                {"misconduct", misconduct.description},
                                {"scenario", candidate.text}});
    return parse_answer(ask(backends, verifier, prompt)) == Answer::yes;
}

}  // namespace

RefinementTrace refine_adversarial(const Scenario& seed, const Misconduct& misconduct, const Regulation& regulation,
                                   const GenerationConfig& cfg, const BackendRegistry& backends) {
    cfg.validate();
    if (seed.kind != ScenarioKind::explicit_violation)
        throw std::invalid_argument("refinement needs an explicit seed, got " + std::string(to_string(seed.kind)));

    RefinementTrace trace;
    trace.seed = seed;
    const Scenario* current = &seed;
    for (int round = 1; round <= cfg.max_rounds; ++round) {
        RefinementRound r;
        try {
            const auto prompt = render(prompt_template(TemplateName::adversarial_refinement),
                                       {{"regulation", regulation.title},
                                        {"misconduct", misconduct.description},
                                        {"scenario", current->text}});
            auto text = trim(ask(backends, cfg.generator, prompt));
            if (text.empty()) throw EmptyResponse("generator returned only whitespace");
            r.candidate = Scenario{seed.id + "-r" + std::to_string(round), std::move(text), misconduct.id,
                                   ScenarioKind::implicit_violation, round};
            r.target_detected = target_detects(r.candidate, cfg.target, backends);
            r.violation_preserved =
                !cfg.check_preservation ||
                violation_preserved(r.candidate, misconduct, regulation, cfg.verifier, backends);
        } catch (const Error& e) {
            throw RoundError(round, e.what());
        }
        trace.rounds.push_back(std::move(r));
        const auto& last = trace.rounds.back();
        if (!last.target_detected && last.violation_preserved) {
            trace.outcome = RefinementOutcome::evaded;
            return trace;
        }
        if (last.violation_preserved) current = &last.candidate;
    }
    trace.outcome = RefinementOutcome::exhausted;
    return trace;
}

double attack_success_rate(std::span<const RefinementTrace> traces) {
    if (traces.empty()) throw EmptyInput("attack success rate needs at least one trace");
    const auto evaded = std::count_if(traces.begin(), traces.end(),
                                      [](const auto& t) { return t.outcome == RefinementOutcome::evaded; });
    return static_cast<double>(evaded) / static_cast<double>(traces.size());
}

namespace {

// What an earlier, possibly interrupted, run already stored.
struct StoreState {
    std::set<std::string> regulations;
    std::map<std::string, std::vector<Misconduct>> misconducts;
    std::map<std::string, JuryMatchedRecord> matched;  // by scenario id
};

StoreState read_state(const std::optional<std::filesystem::path>& store) {
    StoreState st;
    if (!store || !std::filesystem::exists(*store)) return st;
    for (auto& rec : load_store(*store)) {
        if (auto* r = std::get_if<Regulation>(&rec)) st.regulations.insert(r->id);
        if (auto* m = std::get_if<Misconduct>(&rec)) st.misconducts[m->regulation_id].push_back(*m);
        if (auto* j = std::get_if<JuryMatchedRecord>(&rec)) st.matched.emplace(j->record.scenario.id, *j);
    }
    return st;
}

}  // namespace

CorpusBuildResult build_corpus(std::span<const Regulation> regulations, const JuryPool& pool,
                               const CorpusBuildOptions& opts, const BackendRegistry& backends) {
    pool.validate();
    opts.generation.validate();
    if (opts.jury_size == 0 || opts.jury_size > pool.size()) throw KTooLarge(opts.jury_size, pool.size());

    StoreState state = read_state(opts.store);
    auto flush = [&](const Record& rec) {
        if (opts.store) append_store(*opts.store, std::span<const Record>(&rec, 1));
    };

    CorpusBuildResult out;
    std::set<std::string> seen_texts;
    std::size_t written = 0;

    for (const auto& regulation : regulations) {
        if (!state.regulations.count(regulation.id)) {
            flush(regulation);
            state.regulations.insert(regulation.id);
        }
        std::vector<Misconduct> misconducts;
        if (auto it = state.misconducts.find(regulation.id); it != state.misconducts.end()) {
            misconducts = it->second;
        } else {
            misconducts = extract_misconducts(regulation, opts.generation.generator, backends);
            for (const auto& m : misconducts) flush(m);
            state.misconducts[regulation.id] = misconducts;
        }
        out.misconducts.insert(out.misconducts.end(), misconducts.begin(), misconducts.end());

        for (const auto& misconduct : misconducts) {
            const std::size_t n = opts.seeds_per_misconduct;
            std::vector<Scenario> seeds(n);
            std::vector<std::optional<RefinementTrace>> traces(n);
            parallel_for(n, opts.max_concurrency, [&](std::size_t i) {
                ModelRef generator = opts.generation.generator;
                generator.decode.seed = generator.decode.seed.value_or(0) + static_cast<std::int64_t>(i);
                seeds[i] = generate_explicit(misconduct, regulation, generator, backends,
                                             misconduct.id + "-s" + std::to_string(i + 1));
            });
            // Duplicates are dropped before refinement so they cost no further calls.
            std::vector<std::size_t> kept;
            for (std::size_t i = 0; i < n; ++i) {
                if (!seen_texts.insert(seeds[i].text).second) {
                    log::warn("dropping duplicate scenario " + seeds[i].id);
                    continue;
                }
                kept.push_back(i);
            }
            parallel_for(kept.size(), opts.max_concurrency, [&](std::size_t j) {
                const auto i = kept[j];
                traces[i] = refine_adversarial(seeds[i], misconduct, regulation, opts.generation, backends);
            });

            for (auto i : kept) {
                out.explicit_seeds.push_back(seeds[i]);
                out.traces.push_back(*traces[i]);
                auto evading = traces[i]->evading_scenario();
                if (!evading) continue;
                if (!seen_texts.insert(evading->text).second) {
                    log::warn("dropping duplicate scenario " + evading->id);
                    continue;
                }
                if (auto it = state.matched.find(evading->id); it != state.matched.end()) {
                    out.records.push_back(it->second);
                    continue;
                }
                if (opts.max_records && written >= *opts.max_records) {
                    out.complete = false;
                    return out;
                }
                CaseLawRecord case_law{*evading, misconduct, regulation};
                auto matched = rank_case(case_law, pool, opts.generation.verifier, opts.jury_size, backends);
                flush(matched);
                ++written;
                out.records.push_back(std::move(matched));
            }
        }
    }
    return out;
}

}  // namespace autolaw
