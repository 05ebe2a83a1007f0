#include "autolaw/deliberation.hpp"

#include <stdexcept>

#include "autolaw/error.hpp"
#include "autolaw/log.hpp"
#include "autolaw/parallel.hpp"

namespace autolaw {

nlohmann::ordered_json verdict_to_json(const Verdict& v) {
    nlohmann::ordered_json j;
    j["scenario_id"] = v.scenario_id;
    j["demonstration_id"] = v.demonstration_id;
    j["demonstration_used"] = v.demonstration_used;
    nlohmann::ordered_json votes = nlohmann::ordered_json::array();
    for (const auto& vote : v.votes) {
        nlohmann::ordered_json e;
        e["juror_id"] = vote.juror_id;
        e["parsed"] = to_string(vote.parsed);
        if (vote.used_demonstration) e["used_demonstration"] = *vote.used_demonstration;
        e["raw_response"] = vote.raw_response;
        votes.push_back(std::move(e));
    }
    j["votes"] = std::move(votes);
    j["yes_fraction"] = v.yes_fraction;
    j["theta"] = v.theta;
    j["outcome"] = v.outcome;
    j["flagged"] = v.flagged;
    return j;
}

Verdict verdict_from_json(const nlohmann::json& j) {
    Verdict v;
    j.at("scenario_id").get_to(v.scenario_id);
    j.at("demonstration_id").get_to(v.demonstration_id);
    v.demonstration_used = j.value("demonstration_used", true);
    for (const auto& e : j.at("votes")) v.votes.push_back(e.get<Vote>());
    j.at("yes_fraction").get_to(v.yes_fraction);
    j.at("theta").get_to(v.theta);
    j.at("outcome").get_to(v.outcome);
    v.flagged = j.value("flagged", false);
    return v;
}

Retrieval nearest_case_index(const Scenario& x, std::span<const JuryMatchedRecord> corpus, const Similarity& sim) {
    if (corpus.empty()) throw EmptyCorpus("jury-matched corpus is empty");
    Retrieval best{0, sim.scenarios(x, corpus[0].record.scenario)};
    for (std::size_t i = 1; i < corpus.size(); ++i) {
        const double s = sim.scenarios(x, corpus[i].record.scenario);
        if (s > best.similarity) best = {i, s};
    }
    return best;
}

const JuryMatchedRecord& nearest_case(const Scenario& x, std::span<const JuryMatchedRecord> corpus,
                                      const Similarity& sim) {
    return corpus[nearest_case_index(x, corpus, sim).index];
}

bool aggregate(std::span<const Vote> votes, double theta) {
    if (votes.empty()) throw EmptyVotes("cannot aggregate an empty vote list");
    if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in [0, 1)");
    std::size_t yes = 0;
    for (const auto& v : votes) yes += v.is_yes() ? 1 : 0;
    return static_cast<double>(yes) > theta * static_cast<double>(votes.size());
}

Verdict deliberate(const Scenario& x, std::span<const JuryMatchedRecord> corpus, const JuryPool& pool,
                   const BackendRegistry& backends, const Similarity& sim, const DeliberationOptions& opts) {
    const auto hit = nearest_case_index(x, corpus, sim);
    const auto& matched = corpus[hit.index];

    auto jury_ids = matched.ranked_jurors;
    const std::size_t k = opts.jury_size.value_or(matched.jury_size);
    if (k == 0 || k > jury_ids.size()) throw KTooLarge(k, jury_ids.size());
    jury_ids.resize(k);

    Verdict v;
    v.scenario_id = x.id;
    v.demonstration_id = matched.record.scenario.id;
    v.theta = opts.theta;
    v.demonstration_used = opts.use_demos && (!opts.min_similarity || hit.similarity >= *opts.min_similarity);
    const CaseLawRecord* demo = v.demonstration_used ? &matched.record : nullptr;

    v.votes.resize(k);
    const DetectOptions detect_opts{opts.use_roles};
    parallel_for(k, opts.max_concurrency, [&](std::size_t i) {
        v.votes[i] = detect(x, pool.find(jury_ids[i]), demo, backends, detect_opts);
    });

    std::size_t yes = 0;
    for (const auto& vote : v.votes) {
        yes += vote.is_yes() ? 1 : 0;
        v.flagged = v.flagged || vote.parsed == Answer::unparseable;
    }
    v.yes_fraction = static_cast<double>(yes) / static_cast<double>(k);
    v.outcome = aggregate(v.votes, opts.theta);
    if (v.flagged) log::warn("verdict for " + x.id + " includes unparseable votes");
    return v;
}

}  // namespace autolaw
