#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autolaw/backend.hpp"
#include "autolaw/corpus.hpp"
#include "autolaw/jury.hpp"

namespace autolaw {

struct GenerationConfig {
    ModelRef generator;
    ModelRef target;
    ModelRef verifier;
    int max_rounds = 5;
    /// Ask the verifier whether each rewrite still contains the misconduct.
    /// Disabling it accepts every rewrite as preserving the violation.
    bool check_preservation = true;

    /// Throws std::invalid_argument when max_rounds < 1.
    void validate() const;
};

struct RefinementRound {
    Scenario candidate;
    bool target_detected = false;
    bool violation_preserved = false;

    bool operator==(const RefinementRound&) const = default;
};

enum class RefinementOutcome { evaded, exhausted };

std::string_view to_string(RefinementOutcome o);

struct RefinementTrace {
    Scenario seed;
    std::vector<RefinementRound> rounds;
    RefinementOutcome outcome = RefinementOutcome::exhausted;

    /// The evading candidate, when there is one.
    std::optional<Scenario> evading_scenario() const;
    bool operator==(const RefinementTrace&) const = default;
};

nlohmann::ordered_json trace_to_json(const RefinementTrace& t);

/// Reads list items ("- ", "* ", bullet, "1." or "1)") from a model reply,
/// dropping case-insensitive duplicates. Prose lines are ignored.
std::vector<std::string> parse_misconduct_list(std::string_view raw);

/// Asks the generator for the regulation's misconducts. Ids are
/// "<regulation id>-m<n>" in reply order. Throws std::invalid_argument on an
/// empty body and UnparseableExtraction when no list item is found.
std::vector<Misconduct> extract_misconducts(const Regulation& regulation, const ModelRef& generator,
                                            const BackendRegistry& backends);

/// Direct scenario generation: kind explicit, round 0, linked to the misconduct.
Scenario generate_explicit(const Misconduct& misconduct, const Regulation& regulation, const ModelRef& generator,
                           const BackendRegistry& backends, std::string scenario_id);

/// The target's CoT verdict on a scenario: true unless it answers No.
bool target_detects(const Scenario& scenario, const ModelRef& target, const BackendRegistry& backends);

/// Rewrites an explicit seed until the target misses it while the verifier
/// still finds the misconduct, for at most cfg.max_rounds rounds. Each round
/// rewrites the latest candidate that kept the violation. Backend failures
/// surface as RoundError carrying the round number.
RefinementTrace refine_adversarial(const Scenario& seed, const Misconduct& misconduct, const Regulation& regulation,
                                   const GenerationConfig& cfg, const BackendRegistry& backends);

/// Fraction of traces that evaded. Throws EmptyInput.
double attack_success_rate(std::span<const RefinementTrace> traces);

struct CorpusBuildOptions {
    GenerationConfig generation;
    std::size_t jury_size = 3;
    std::size_t seeds_per_misconduct = 1;
    /// When set, results are appended here as they are produced, and records
    /// already present are reused on the next run.
    std::optional<std::filesystem::path> store;
    /// Stop after writing this many matched records (partial runs).
    std::optional<std::size_t> max_records;
    std::size_t max_concurrency = 4;
};

struct CorpusBuildResult {
    std::vector<Misconduct> misconducts;
    std::vector<Scenario> explicit_seeds;
    std::vector<RefinementTrace> traces;
    std::vector<JuryMatchedRecord> records;
    bool complete = true;
};

/// Case-law generation with jury selection: for every regulation, extract
/// misconducts; for every misconduct, generate seeds and refine them; every
/// evading scenario becomes case law ranked against the pool.
///
/// Explicit seed i is requested with decode seed i so seeds differ even at
/// temperature 0. Duplicate scenario texts are dropped with a warning.
CorpusBuildResult build_corpus(std::span<const Regulation> regulations, const JuryPool& pool,
                               const CorpusBuildOptions& opts, const BackendRegistry& backends);

}  // namespace autolaw
