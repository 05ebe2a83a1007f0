#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autolaw/backend.hpp"
#include "autolaw/corpus.hpp"
#include "autolaw/detector.hpp"
#include "autolaw/jury.hpp"

namespace autolaw {

/// Each pool member's demo-free vote on the case-law scenario, in pool order.
/// A juror whose backend fails gets an unparseable vote instead of aborting.
std::vector<Vote> collect_answers(const CaseLawRecord& case_law, const JuryPool& pool, const BackendRegistry& backends,
                                  std::size_t max_concurrency = 8);

/// Parses the trailing "#### [(index, score), ...]" array of a verifier reply.
/// Returns nothing unless every index in [0, n) gets a finite score; scores
/// are clamped to [0, 1]; out-of-range indices are ignored.
std::optional<std::vector<double>> parse_score_array(std::string_view raw, std::size_t n);

/// The {label} text listing the answers the verifier grades.
std::string answer_list_label(const std::vector<Vote>& answers);

/// The jury_ranking prompt for one case. The regulation body is the {context}.
std::string render_ranking_prompt(const CaseLawRecord& case_law, const std::vector<Vote>& answers);

struct VerifierOutcome {
    ScoreVector scores;
    bool fallback = false;  ///< true when the uniform 0.5 fallback was used
    int attempts = 0;
};

/// Asks the verifier to grade every answer. One retry on an unparseable
/// reply, then a uniform 0.5 fallback with a warning.
VerifierOutcome score_with_verifier(const CaseLawRecord& case_law, const std::vector<Vote>& answers,
                                    const ModelRef& verifier, const BackendRegistry& backends);

/// Top-k by score, ties to the lower pool index. Returns indices into scores.
std::vector<std::size_t> select_jury_indices(const ScoreVector& scores, std::size_t k);

/// The k jurors maximizing the summed score. Throws KTooLarge.
std::vector<Juror> select_jury(const ScoreVector& scores, const JuryPool& pool, std::size_t k);

/// Stage 2 for one case: answers, verifier scores, ranked record.
JuryMatchedRecord rank_case(const CaseLawRecord& case_law, const JuryPool& pool, const ModelRef& verifier,
                            std::size_t k, const BackendRegistry& backends);

JuryPool load_pool(const std::filesystem::path& path);
void save_pool(const std::filesystem::path& path, const JuryPool& pool);

}  // namespace autolaw
