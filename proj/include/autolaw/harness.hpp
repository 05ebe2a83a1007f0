#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autolaw/backend.hpp"
#include "autolaw/corpus.hpp"
#include "autolaw/detector.hpp"
#include "autolaw/jury.hpp"
#include "autolaw/metrics.hpp"
#include "autolaw/similarity.hpp"

namespace autolaw {

enum class RunMode { majority_vote, autolaw };

std::string_view to_string(RunMode m);
RunMode run_mode_from_string(std::string_view s);

struct Ablation {
    bool use_selection = true;
    bool use_roles = true;
    bool use_demos = true;

    bool operator==(const Ablation&) const = default;
};

struct RunConfig {
    std::string config_id;  ///< derived from the other fields when empty
    RunMode mode = RunMode::autolaw;
    std::size_t k = 3;
    JuryPool pool;
    std::string pool_id = "P1";
    Ablation ablation;
    std::uint64_t seed = 0;
    double theta = 0.5;
    std::size_t max_concurrency = 8;

    /// Majority vote with no selection, roles or demonstrations.
    static RunConfig majority_vote(JuryPool pool, std::size_t k, std::uint64_t seed);
    static RunConfig autolaw(JuryPool pool, std::size_t k, std::uint64_t seed);

    /// Throws std::invalid_argument when majority vote asks for selection,
    /// theta is outside [0, 1) or the pool is invalid; KTooLarge for k.
    void validate() const;
    std::string id() const;
};

/// Where votes come from: real backends or synthetic jurors.
class VoteSource {
public:
    virtual ~VoteSource() = default;
    virtual Vote vote(const Scenario& scenario, const Juror& juror, const CaseLawRecord* demonstration,
                      bool use_roles) const = 0;
};

/// Votes through the detector against configured backends. Backend failures
/// become unparseable votes with a warning so one bad juror cannot sink a run.
class BackendVoteSource final : public VoteSource {
public:
    explicit BackendVoteSource(const BackendRegistry& backends) : backends_(backends) {}
    Vote vote(const Scenario& scenario, const Juror& juror, const CaseLawRecord* demonstration,
              bool use_roles) const override;

private:
    const BackendRegistry& backends_;
};

/// A simulated juror answering correctly with a fixed per-tag probability.
struct SyntheticJuror {
    std::string id;
    std::map<std::string, double> true_accuracy;  ///< misconduct tag -> P(correct)
    double default_accuracy = 0.5;                ///< for tags not in the map
    Role role = Role::Judge;

    double accuracy(std::string_view tag) const;
    /// Throws std::invalid_argument unless every accuracy lies in [0, 1].
    void validate() const;
};

struct PoolSpec {
    std::string pool_id = "P1";
    std::vector<SyntheticJuror> jurors;
    /// Added to a juror's accuracy when it sees a demonstration.
    double demo_gain = 0.0;
    /// Added to a juror's accuracy when its persona prefix is used.
    double role_gain = 0.0;

    /// The JuryPool the simulated jurors stand in for.
    JuryPool jury_pool() const;
};

/// Answers by a Bernoulli draw keyed by (world seed, scenario id, juror id),
/// so every configuration sees the same draw for the same juror and example.
class SyntheticVoteSource final : public VoteSource {
public:
    SyntheticVoteSource(PoolSpec spec, std::uint64_t world_seed);
    Vote vote(const Scenario& scenario, const Juror& juror, const CaseLawRecord* demonstration,
              bool use_roles) const override;
    const PoolSpec& spec() const noexcept { return spec_; }

private:
    PoolSpec spec_;
    std::uint64_t world_seed_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Scores a juror as rho * accuracy + (1 - rho) * noise with noise drawn
/// uniformly from [0, 1) per (noise seed, tag, juror).
struct SyntheticVerifier {
    double rho = 1.0;
    std::uint64_t noise_seed = 0;

    double score(const SyntheticJuror& juror, std::string_view tag) const;
    void validate() const;
};

/// Per example: k jurors sampled without replacement from a stream keyed by
/// (cfg.seed, example id), demo-free votes, strict theta aggregation. The
/// report's per-juror rates come from polling every pool juror.
EvalReport run_majority_vote(const RunConfig& cfg, std::span<const LabeledExample> dataset, const VoteSource& votes);

/// Full deliberation per example with ablations: without selection the jury
/// is sampled exactly as in majority vote; without demos or roles the
/// corresponding prompt parts are left out.
EvalReport run_autolaw(const RunConfig& cfg, std::span<const LabeledExample> dataset,
                       std::span<const JuryMatchedRecord> corpus, const Similarity& sim, const VoteSource& votes);

/// All 8 combinations of the three ablation flags, full pipeline first.
std::vector<Ablation> ablation_grid();

/// Jurors with accuracies 0.9, 0.8, 0.7, 0.6, 0.5, 0.4 on every tag.
PoolSpec standard_pool(std::span<const std::string> tags);

/// Six jurors with a base accuracy in [0.3, 0.9] and a per-tag offset in
/// [-0.3, 0.3] (clamped), drawn from (seed, pool index). The wide per-tag
/// spread models jurors whose expertise differs from one misconduct to the next.
PoolSpec random_pool(std::uint64_t seed, std::size_t pool_index, std::span<const std::string> tags);

/// "m01".."mNN".
std::vector<std::string> synthetic_tags(std::size_t n = 25);

struct SimulationSetup {
    std::vector<std::string> tags = synthetic_tags();
    std::size_t n_scenarios = 500;
    /// Share of violation rows; the rest are compliant.
    double violation_fraction = 1.0;
    std::uint64_t seed = 0;
};

struct SimulatedRun {
    RunMode mode = RunMode::autolaw;
    std::size_t k = 5;
    Ablation ablation;
    double theta = 0.5;

    bool operator==(const SimulatedRun&) const = default;
};

/// Labeled synthetic scenarios, each tagged with one misconduct.
std::vector<LabeledExample> synthetic_dataset(const SimulationSetup& setup);

/// One matched record per tag, scored by the synthetic verifier.
std::vector<JuryMatchedRecord> synthetic_corpus(const PoolSpec& pool, const SyntheticVerifier& verifier,
                                                std::span<const std::string> tags, std::size_t jury_size);

/// Runs every configuration on a synthetic dataset with exact-tag retrieval.
/// Fully determined by the setup seed and the verifier noise seed.
std::vector<EvalReport> simulate(const PoolSpec& pool, const SyntheticVerifier& verifier,
                                 const SimulationSetup& setup, std::span<const SimulatedRun> runs);

/// One checked property of a report set.
struct PropertyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Named property suites over the reports of one eval or simulate call:
///  "dominance": full-pipeline DR >= majority-vote DR per pool and k;
///  "vote-size": majority-vote DR strictly increases with k in every pool;
///  "variance":  across pools, stddev of full-pipeline DR <= that of majority vote per k.
/// Throws std::invalid_argument for an unknown suite name.
std::vector<PropertyCheck> check_suite(std::string_view suite, std::span<const EvalReport> reports);
std::vector<std::string> suite_names();

}  // namespace autolaw
