#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "autolaw/backend.hpp"
#include "autolaw/corpus.hpp"
#include "autolaw/detector.hpp"
#include "autolaw/jury.hpp"
#include "autolaw/similarity.hpp"

namespace autolaw {

/// Aggregated deliberation output for one input scenario.
struct Verdict {
    std::string scenario_id;
    std::string demonstration_id;  ///< scenario id of the retrieved case law
    std::vector<Vote> votes;
    double yes_fraction = 0.0;
    bool outcome = false;  ///< true = violation
    double theta = 0.5;
    bool demonstration_used = true;
    bool flagged = false;  ///< at least one vote was unparseable

    bool operator==(const Verdict&) const = default;
};

nlohmann::ordered_json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

struct Retrieval {
    std::size_t index;
    double similarity;
};

/// Argmax of similarity over the corpus; ties go to the lowest index.
/// Throws EmptyCorpus.
Retrieval nearest_case_index(const Scenario& x, std::span<const JuryMatchedRecord> corpus, const Similarity& sim);

const JuryMatchedRecord& nearest_case(const Scenario& x, std::span<const JuryMatchedRecord> corpus,
                                      const Similarity& sim);

/// True iff #yes > theta * |votes|. Unparseable votes count as no.
/// Throws EmptyVotes; theta must lie in [0, 1).
bool aggregate(std::span<const Vote> votes, double theta);

struct DeliberationOptions {
    double theta = 0.5;
    std::optional<std::size_t> jury_size;  ///< overrides the record's k
    bool use_demos = true;
    bool use_roles = true;
    /// When set, a retrieved case below this similarity is not shown as a
    /// demonstration (its jury is still used). Off by default.
    std::optional<double> min_similarity;
    std::size_t max_concurrency = 8;
};

/// Retrieve the nearest case law, let its precomputed jury vote on x with
/// the case as demonstration, aggregate with theta.
Verdict deliberate(const Scenario& x, std::span<const JuryMatchedRecord> corpus, const JuryPool& pool,
                   const BackendRegistry& backends, const Similarity& sim, const DeliberationOptions& opts = {});

}  // namespace autolaw
