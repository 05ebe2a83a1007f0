#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "autolaw/backend.hpp"
#include "autolaw/corpus.hpp"
#include "autolaw/jury.hpp"

namespace autolaw {

enum class Answer { yes, no, unparseable };

std::string_view to_string(Answer a);
Answer answer_from_string(std::string_view s);

/// Reads a Yes/No answer from free text.
///
/// The last "####" separator wins: the text after it must start with
/// "Answer: Yes|No" or a bare "Yes|No" (case-insensitive, surrounding
/// markdown and punctuation ignored). Without a separator the final
/// non-empty line is tried the same way. Never throws.
Answer parse_answer(std::string_view raw) noexcept;

/// "#### Answer: Yes" / "#### Answer: No". Requires a parsed answer.
std::string canonical_answer(Answer a);

/// One juror's binary judgement on one scenario.
struct Vote {
    std::string juror_id;
    std::string raw_response;
    Answer parsed = Answer::unparseable;
    std::optional<std::string> used_demonstration;  ///< scenario id of the demo

    bool is_yes() const noexcept { return parsed == Answer::yes; }
    bool operator==(const Vote&) const = default;
};

void to_json(nlohmann::json& j, const Vote& v);
void from_json(const nlohmann::json& j, Vote& v);

struct DetectOptions {
    bool use_roles = true;  ///< send the juror's persona prefix as a system turn
};

/// The messages detect() sends; exposed for prompt audits.
std::vector<Message> detection_messages(const Scenario& scenario, const Juror& juror,
                                        const CaseLawRecord* demonstration, const DetectOptions& opts);

/// Renders jury_vote (with a demonstration) or cot_detection (without),
/// queries the juror's model and parses the reply. Unparseable replies emit a
/// warning. Backend errors propagate.
Vote detect(const Scenario& scenario, const Juror& juror, const CaseLawRecord* demonstration,
            const BackendRegistry& backends, const DetectOptions& opts = {});

}  // namespace autolaw
