#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "autolaw/jury.hpp"

namespace autolaw {

/// Version written into every stored record. Readers reject newer versions
/// and unknown fields.
inline constexpr int kSchemaVersion = 1;

struct Regulation {
    std::string id;
    std::string title;
    std::string body;  ///< may be empty when only metadata is known
    std::optional<int> pages;
    std::optional<int> declared_misconducts;

    bool operator==(const Regulation&) const = default;
};

struct Misconduct {
    std::string id;
    std::string regulation_id;
    std::string description;

    bool operator==(const Misconduct&) const = default;
};

enum class ScenarioKind { explicit_violation, implicit_violation, real_world, compliant };

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(std::string_view s);

struct Scenario {
    std::string id;
    std::string text;
    std::optional<std::string> misconduct_id;
    ScenarioKind kind = ScenarioKind::explicit_violation;
    int refinement_round = 0;

    bool operator==(const Scenario&) const = default;
};

/// One (scenario, misconduct, regulation) precedent.
struct CaseLawRecord {
    Scenario scenario;
    Misconduct misconduct;
    Regulation regulation;

    bool operator==(const CaseLawRecord&) const = default;
};

/// Case law plus its verifier scores and the jurors ranked by them.
struct JuryMatchedRecord {
    CaseLawRecord record;
    ScoreVector score_vector;
    std::vector<std::string> ranked_jurors;
    std::size_t jury_size = 0;  ///< k; the jury is the first k ranked jurors

    std::vector<std::string> jury() const;
    bool operator==(const JuryMatchedRecord&) const = default;
};

/// Builds a matched record from scores, deriving ranked_jurors with rank_order.
JuryMatchedRecord make_matched_record(CaseLawRecord record, ScoreVector scores, std::size_t jury_size);

enum class GroundTruth { violation, no_violation };

std::string_view to_string(GroundTruth truth);
GroundTruth ground_truth_from_string(std::string_view s);

struct LabeledExample {
    Scenario scenario;
    GroundTruth ground_truth = GroundTruth::violation;
    std::string dataset_tag;

    bool operator==(const LabeledExample&) const = default;
};

using Record = std::variant<Regulation, Misconduct, Scenario, CaseLawRecord, JuryMatchedRecord, LabeledExample, Juror>;

std::string_view record_type_name(const Record& record);

template <typename T>
std::vector<T> records_of(std::span<const Record> records) {
    std::vector<T> out;
    for (const auto& r : records)
        if (const T* p = std::get_if<T>(&r)) out.push_back(*p);
    return out;
}

template <typename T>
std::vector<Record> to_records(const std::vector<T>& items) {
    return std::vector<Record>(items.begin(), items.end());
}

/// Stored line: {"schema_version":1,"type":"<name>", ...fields}.
nlohmann::ordered_json record_to_json(const Record& record);
/// Throws SchemaMismatch on a newer version, unknown type or unknown field.
Record record_from_json(const nlohmann::json& j);

/// Writes records as JSON Lines in order, atomically (temp file + rename),
/// holding an exclusive advisory lock file "<path>.lock".
void save_store(const std::filesystem::path& path, std::span<const Record> records);

/// Appends under the same lock; used for incremental flushes.
void append_store(const std::filesystem::path& path, std::span<const Record> records);

/// Throws MalformedRecord(line) on unparseable lines or broken matched-record
/// rankings, SchemaMismatch on version or field problems.
std::vector<Record> load_store(const std::filesystem::path& path);

struct IntegrityViolation {
    std::size_t index;  ///< position of the offending record
    std::string message;
};

/// Empty iff every record satisfies its invariants and every reference resolves.
std::vector<IntegrityViolation> validate_referential_integrity(std::span<const Record> records);

}  // namespace autolaw
