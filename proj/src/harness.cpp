#include "autolaw/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <memory>
#include <stdexcept>

#include "autolaw/deliberation.hpp"
#include "autolaw/error.hpp"
#include "autolaw/log.hpp"
#include "autolaw/parallel.hpp"
#include "autolaw/rng.hpp"

namespace autolaw {

std::string_view to_string(RunMode m) { return m == RunMode::majority_vote ? "majority_vote" : "autolaw"; }

RunMode run_mode_from_string(std::string_view s) {
    if (s == "majority_vote" || s == "mv") return RunMode::majority_vote;
    if (s == "autolaw") return RunMode::autolaw;
    throw std::invalid_argument("unknown run mode: " + std::string(s));
}

RunConfig RunConfig::majority_vote(JuryPool pool, std::size_t k, std::uint64_t seed) {
    RunConfig c;
    c.mode = RunMode::majority_vote;
    c.k = k;
    c.pool = std::move(pool);
    c.ablation = {false, false, false};
    c.seed = seed;
    return c;
}

RunConfig RunConfig::autolaw(JuryPool pool, std::size_t k, std::uint64_t seed) {
    RunConfig c;
    c.mode = RunMode::autolaw;
    c.k = k;
    c.pool = std::move(pool);
    c.seed = seed;
    return c;
}

void RunConfig::validate() const {
    pool.validate();
    if (mode == RunMode::majority_vote && ablation.use_selection)
        throw std::invalid_argument("majority vote cannot use jury selection");
    if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in [0, 1)");
    if (k == 0 || k > pool.size()) throw KTooLarge(k, pool.size());
}

std::string RunConfig::id() const {
    if (!config_id.empty()) return config_id;
    std::string out = pool_id + "/" + std::string(to_string(mode)) + "/vote-" + std::to_string(k);
    if (mode == RunMode::autolaw && ablation != Ablation{}) {
        std::string flags;
        auto add = [&](bool on, const char* name) {
            if (!on) return;
            if (!flags.empty()) flags += "+";
            flags += name;
        };
        add(ablation.use_selection, "selection");
        add(ablation.use_roles, "roles");
        add(ablation.use_demos, "demos");
        out += "/" + (flags.empty() ? std::string("none") : flags);
    }
    return out;
}

Vote BackendVoteSource::vote(const Scenario& scenario, const Juror& juror, const CaseLawRecord* demonstration,
                             bool use_roles) const {
    try {
        return detect(scenario, juror, demonstration, backends_, DetectOptions{use_roles});
    } catch (const Error& e) {
        log::warn("juror " + juror.id + " failed on " + scenario.id + ": " + e.what());
        Vote v{juror.id, std::string{}, Answer::unparseable, std::nullopt};
        if (demonstration) v.used_demonstration = demonstration->scenario.id;
        return v;
    }
}

double SyntheticJuror::accuracy(std::string_view tag) const {
    if (auto it = true_accuracy.find(std::string(tag)); it != true_accuracy.end()) return it->second;
    return default_accuracy;
}

void SyntheticJuror::validate() const {
    auto bad = [](double p) { return !(p >= 0.0 && p <= 1.0); };
    if (bad(default_accuracy)) throw std::invalid_argument("accuracy of " + id + " outside [0, 1]");
    for (const auto& [tag, p] : true_accuracy)
        if (bad(p)) throw std::invalid_argument("accuracy of " + id + " on " + tag + " outside [0, 1]");
}

JuryPool PoolSpec::jury_pool() const {
    JuryPool pool;
    for (const auto& j : jurors) pool.jurors.push_back(Juror{j.id, j.role, ModelRef{"synthetic", j.id, {}}, false});
    return pool;
}

SyntheticVoteSource::SyntheticVoteSource(PoolSpec spec, std::uint64_t world_seed)
    : spec_(std::move(spec)), world_seed_(world_seed) {
    for (std::size_t i = 0; i < spec_.jurors.size(); ++i) {
        spec_.jurors[i].validate();
        if (!index_.emplace(spec_.jurors[i].id, i).second)
            throw std::invalid_argument("duplicate synthetic juror " + spec_.jurors[i].id);
    }
}

Vote SyntheticVoteSource::vote(const Scenario& scenario, const Juror& juror, const CaseLawRecord* demonstration,
                               bool use_roles) const {
    auto it = index_.find(juror.id);
    if (it == index_.end()) throw std::invalid_argument("no synthetic juror " + juror.id);
    const auto& sj = spec_.jurors[it->second];

    double p = sj.accuracy(scenario.misconduct_id.value_or(""));
    if (demonstration) p += spec_.demo_gain;
    if (use_roles) p += spec_.role_gain;
    p = std::clamp(p, 0.0, 1.0);

    const bool truth = scenario.kind != ScenarioKind::compliant;
    const bool correct = RngStream::derive(world_seed_, "vote", scenario.id, juror.id).bernoulli(p);
    const bool says_yes = correct ? truth : !truth;

    Vote v;
    v.juror_id = juror.id;
    v.raw_response = canonical_answer(says_yes ? Answer::yes : Answer::no);
    v.parsed = parse_answer(v.raw_response);
    if (demonstration) v.used_demonstration = demonstration->scenario.id;
    return v;
}

double SyntheticVerifier::score(const SyntheticJuror& juror, std::string_view tag) const {
    const double noise = RngStream::derive(noise_seed, "verifier", tag, juror.id).uniform();
    return std::clamp(rho * juror.accuracy(tag) + (1.0 - rho) * noise, 0.0, 1.0);
}

void SyntheticVerifier::validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("verifier correlation must lie in [0, 1]");
}

namespace {

std::vector<std::size_t> random_jury(const RunConfig& cfg, const std::string& example_id) {
    return RngStream::derive(cfg.seed, "jury", example_id).sample_without_replacement(cfg.pool.size(), cfg.k);
}

struct ExampleOutcome {
    bool predicted = false;
    std::vector<Vote> jury_votes;
    std::vector<Vote> all_votes;  // pool order; majority vote only
};

EvalReport summarize(const RunConfig& cfg, std::span<const LabeledExample> dataset,
                     const std::vector<ExampleOutcome>& outcomes) {
    EvalReport r;
    r.config_id = cfg.id();
    r.pool_id = cfg.pool_id;
    r.mode = std::string(to_string(cfg.mode));
    r.k = cfg.k;
    r.n = dataset.size();

    std::vector<GroundTruth> labels;
    auto predictions = std::make_unique<bool[]>(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        labels.push_back(dataset[i].ground_truth);
        predictions[i] = outcomes[i].predicted;
    }
    const std::span<const bool> preds(predictions.get(), dataset.size());

    r.detection_rate = detection_rate(preds, labels);
    const bool both = std::count(labels.begin(), labels.end(), GroundTruth::violation) > 0 &&
                      std::count(labels.begin(), labels.end(), GroundTruth::no_violation) > 0;
    if (both) r.f1 = f1(preds, labels);

    std::size_t votes = 0, unparseable = 0;
    // Individual rates: every polled juror in majority vote, serving jurors otherwise.
    std::map<std::string, std::pair<std::size_t, std::size_t>> hits;  // id -> (yes, seen) on violation rows
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (const auto& v : outcomes[i].jury_votes) {
            ++votes;
            unparseable += v.parsed == Answer::unparseable ? 1 : 0;
        }
        if (dataset[i].ground_truth != GroundTruth::violation) continue;
        const auto& source = outcomes[i].all_votes.empty() ? outcomes[i].jury_votes : outcomes[i].all_votes;
        for (const auto& v : source) {
            auto& h = hits[v.juror_id];
            h.first += v.is_yes() ? 1 : 0;
            ++h.second;
        }
    }
    r.unparseable_rate = votes ? static_cast<double>(unparseable) / static_cast<double>(votes) : 0.0;
    for (const auto& [id, h] : hits)
        r.per_juror_rates[id] = 100.0 * static_cast<double>(h.first) / static_cast<double>(h.second);
    return r;
}

bool decide(const RunConfig& cfg, const std::vector<Vote>& votes) { return aggregate(votes, cfg.theta); }

}  // namespace

EvalReport run_majority_vote(const RunConfig& cfg, std::span<const LabeledExample> dataset, const VoteSource& votes) {
    cfg.validate();
    if (cfg.mode != RunMode::majority_vote) throw std::invalid_argument("run_majority_vote needs mode majority_vote");
    std::vector<ExampleOutcome> outcomes(dataset.size());
    parallel_for(dataset.size(), cfg.max_concurrency, [&](std::size_t i) {
        const auto& x = dataset[i].scenario;
        auto& out = outcomes[i];
        out.all_votes.reserve(cfg.pool.size());
        for (const auto& juror : cfg.pool.jurors) out.all_votes.push_back(votes.vote(x, juror, nullptr, cfg.ablation.use_roles));
        for (auto j : random_jury(cfg, x.id)) out.jury_votes.push_back(out.all_votes[j]);
        out.predicted = decide(cfg, out.jury_votes);
    });
    return summarize(cfg, dataset, outcomes);
}

EvalReport run_autolaw(const RunConfig& cfg, std::span<const LabeledExample> dataset,
                       std::span<const JuryMatchedRecord> corpus, const Similarity& sim, const VoteSource& votes) {
    cfg.validate();
    if (cfg.mode != RunMode::autolaw) throw std::invalid_argument("run_autolaw needs mode autolaw");
    if (corpus.empty()) throw EmptyCorpus("jury-matched corpus is empty");
    std::vector<ExampleOutcome> outcomes(dataset.size());
    parallel_for(dataset.size(), cfg.max_concurrency, [&](std::size_t i) {
        const auto& x = dataset[i].scenario;
        const auto& matched = corpus[nearest_case_index(x, corpus, sim).index];
        const CaseLawRecord* demo = cfg.ablation.use_demos ? &matched.record : nullptr;

        std::vector<const Juror*> jury;
        if (cfg.ablation.use_selection) {
            if (cfg.k > matched.ranked_jurors.size()) throw KTooLarge(cfg.k, matched.ranked_jurors.size());
            for (std::size_t j = 0; j < cfg.k; ++j) jury.push_back(&cfg.pool.find(matched.ranked_jurors[j]));
        } else {
            for (auto j : random_jury(cfg, x.id)) jury.push_back(&cfg.pool.jurors[j]);
        }
        auto& out = outcomes[i];
        for (const auto* juror : jury) out.jury_votes.push_back(votes.vote(x, *juror, demo, cfg.ablation.use_roles));
        out.predicted = decide(cfg, out.jury_votes);
    });
    return summarize(cfg, dataset, outcomes);
}

std::vector<Ablation> ablation_grid() {
    std::vector<Ablation> grid;
    for (int mask = 7; mask >= 0; --mask) grid.push_back({(mask & 4) != 0, (mask & 2) != 0, (mask & 1) != 0});
    return grid;
}

namespace {
constexpr Role kRoleCycle[] = {Role::Judge, Role::Prosecutor, Role::Lawyer};
}

PoolSpec standard_pool(std::span<const std::string> tags) {
    PoolSpec spec;
    spec.pool_id = "standard";
    const double acc[] = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4};
    for (std::size_t i = 0; i < 6; ++i) {
        SyntheticJuror j;
        j.id = "J" + std::to_string(i + 1);
        j.role = kRoleCycle[i % 3];
        j.default_accuracy = acc[i];
        for (const auto& t : tags) j.true_accuracy[t] = acc[i];
        spec.jurors.push_back(std::move(j));
    }
    return spec;
}

PoolSpec random_pool(std::uint64_t seed, std::size_t pool_index, std::span<const std::string> tags) {
    PoolSpec spec;
    spec.pool_id = "P" + std::to_string(pool_index + 1);
    const auto pool_label = std::to_string(pool_index);
    for (std::size_t i = 0; i < 6; ++i) {
        SyntheticJuror j;
        j.id = "J" + std::to_string(i + 1);
        j.role = kRoleCycle[i % 3];
        j.default_accuracy = 0.3 + 0.6 * RngStream::derive(seed, "pool", pool_label, j.id).uniform();
        for (const auto& t : tags) {
            const double offset = 0.6 * RngStream::derive(seed, "pool", pool_label, j.id, t).uniform() - 0.3;
            j.true_accuracy[t] = std::clamp(j.default_accuracy + offset, 0.0, 1.0);
        }
        spec.jurors.push_back(std::move(j));
    }
    return spec;
}

std::vector<std::string> synthetic_tags(std::size_t n) {
    std::vector<std::string> tags;
    for (std::size_t i = 1; i <= n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "m%02zu", i);
        tags.emplace_back(buf);
    }
    return tags;
}

std::vector<LabeledExample> synthetic_dataset(const SimulationSetup& setup) {
    if (setup.n_scenarios == 0) throw std::invalid_argument("simulation needs at least one scenario");
    if (setup.tags.empty()) throw std::invalid_argument("simulation needs at least one misconduct tag");
    std::vector<LabeledExample> out;
    out.reserve(setup.n_scenarios);
    for (std::size_t i = 0; i < setup.n_scenarios; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "sim-%05zu", i + 1);
        auto rng = RngStream::derive(setup.seed, "example", id);
        const auto& tag = setup.tags[rng.below(setup.tags.size())];
        const bool violation = rng.uniform() < setup.violation_fraction;
        LabeledExample ex;
        ex.dataset_tag = "synthetic";
        ex.scenario.id = id;
        if (violation) {
            ex.scenario.text = std::string("Synthetic scenario ") + id + " involving misconduct " + tag + ".";
            ex.scenario.misconduct_id = tag;
            ex.scenario.kind = ScenarioKind::implicit_violation;
            ex.scenario.refinement_round = 1;
            ex.ground_truth = GroundTruth::violation;
        } else {
            ex.scenario.text = std::string("Synthetic compliant scenario ") + id + ".";
            ex.scenario.kind = ScenarioKind::compliant;
            ex.ground_truth = GroundTruth::no_violation;
        }
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<JuryMatchedRecord> synthetic_corpus(const PoolSpec& pool, const SyntheticVerifier& verifier,
                                                std::span<const std::string> tags, std::size_t jury_size) {
    verifier.validate();
    const Regulation regulation{"sim-reg", "Synthetic regulation", "", std::nullopt, std::nullopt};
    std::vector<JuryMatchedRecord> out;
    for (const auto& tag : tags) {
        CaseLawRecord rec;
        rec.regulation = regulation;
        rec.misconduct = Misconduct{tag, regulation.id, "Synthetic misconduct " + tag};
        rec.scenario = Scenario{"case-" + tag, "Synthetic case law for misconduct " + tag + ".", tag,
                                ScenarioKind::implicit_violation, 1};
        ScoreVector scores;
        for (const auto& j : pool.jurors) scores.push_back({j.id, verifier.score(j, tag)});
        out.push_back(make_matched_record(std::move(rec), std::move(scores), jury_size));
    }
    return out;
}

std::vector<EvalReport> simulate(const PoolSpec& pool, const SyntheticVerifier& verifier,
                                 const SimulationSetup& setup, std::span<const SimulatedRun> runs) {
    verifier.validate();
    const auto dataset = synthetic_dataset(setup);
    std::size_t jury_size = 1;
    for (const auto& r : runs) jury_size = std::max(jury_size, r.k);
    jury_size = std::min(jury_size, pool.jurors.size());
    const auto corpus = synthetic_corpus(pool, verifier, setup.tags, jury_size);
    const SyntheticVoteSource source(pool, setup.seed);
    const TagSimilarity sim;

    std::vector<EvalReport> reports;
    for (const auto& run : runs) {
        RunConfig cfg;
        cfg.mode = run.mode;
        cfg.k = run.k;
        cfg.pool = pool.jury_pool();
        cfg.pool_id = pool.pool_id;
        cfg.ablation = run.mode == RunMode::majority_vote ? Ablation{false, false, false} : run.ablation;
        cfg.seed = setup.seed;
        cfg.theta = run.theta;
        cfg.max_concurrency = 1;  // synthetic votes are cheap; threads only add overhead
        reports.push_back(run.mode == RunMode::majority_vote ? run_majority_vote(cfg, dataset, source)
                                                             : run_autolaw(cfg, dataset, corpus, sim, source));
    }
    return reports;
}

namespace {

bool is_full_pipeline(const EvalReport& r) {
    return r.mode == "autolaw" && r.config_id == r.pool_id + "/autolaw/vote-" + std::to_string(r.k);
}

bool is_mv(const EvalReport& r) { return r.mode == "majority_vote"; }

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

}  // namespace

std::vector<std::string> suite_names() { return {"dominance", "vote-size", "variance"}; }

std::vector<PropertyCheck> check_suite(std::string_view suite, std::span<const EvalReport> reports) {
    std::vector<PropertyCheck> out;
    if (suite == "dominance") {
        for (const auto& mv : reports) {
            if (!is_mv(mv)) continue;
            for (const auto& al : reports) {
                if (!is_full_pipeline(al) || al.pool_id != mv.pool_id || al.k != mv.k) continue;
                out.push_back({mv.pool_id + "/vote-" + std::to_string(mv.k), al.detection_rate >= mv.detection_rate,
                               "pipeline " + fmt(al.detection_rate) + " vs majority " + fmt(mv.detection_rate)});
            }
        }
    } else if (suite == "vote-size") {
        std::map<std::string, std::map<std::size_t, double>> by_pool;
        for (const auto& r : reports)
            if (is_mv(r)) by_pool[r.pool_id][r.k] = r.detection_rate;
        for (const auto& [pool, rates] : by_pool) {
            if (rates.size() < 2) continue;
            bool ok = true;
            std::string detail;
            double prev = -1.0;
            for (const auto& [k, dr] : rates) {
                ok = ok && dr > prev;
                prev = dr;
                detail += (detail.empty() ? "" : " < ") + ("vote-" + std::to_string(k) + " " + fmt(dr));
            }
            out.push_back({pool, ok, detail});
        }
    } else if (suite == "variance") {
        std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_k;  // k -> (mv, pipeline)
        for (const auto& r : reports) {
            if (is_mv(r)) by_k[r.k].first.push_back(r.detection_rate);
            if (is_full_pipeline(r)) by_k[r.k].second.push_back(r.detection_rate);
        }
        for (const auto& [k, rates] : by_k) {
            if (rates.first.size() < 2 || rates.second.size() < 2) continue;
            const double mv = pool_stddev(rates.first);
            const double al = pool_stddev(rates.second);
            out.push_back({"vote-" + std::to_string(k), al <= mv,
                           "pipeline stddev " + fmt(al) + " vs majority " + fmt(mv)});
        }
    } else {
        throw std::invalid_argument("unknown suite: " + std::string(suite));
    }
    if (out.empty()) out.push_back({"applicable", false, "no reports the suite applies to"});
    return out;
}

}  // namespace autolaw
