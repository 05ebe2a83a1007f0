#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "autolaw/backend.hpp"

namespace autolaw {

enum class Role { Judge, Lawyer, Prosecutor };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

/// A (legal role, model) pairing drawn from the jury pool.
struct Juror {
    std::string id;
    Role role = Role::Judge;
    ModelRef model;
    bool fine_tuned = false;

    bool operator==(const Juror&) const = default;
};

/// Display label such as "(Judge, Qwen2.5)" or "(Lawyer, Mistral*)".
std::string display_name(const Juror& juror);

struct JuryPool {
    std::vector<Juror> jurors;

    /// Throws std::invalid_argument on an empty pool or duplicate ids.
    void validate() const;
    std::size_t size() const noexcept { return jurors.size(); }
    const Juror& find(std::string_view id) const;
    std::size_t index_of(std::string_view id) const;
};

/// Verifier output for one juror.
struct ScoreEntry {
    std::string juror_id;
    double score = 0.0;

    bool operator==(const ScoreEntry&) const = default;
};

using ScoreVector = std::vector<ScoreEntry>;

/// Indices of entries ordered by score descending, ties broken by lower
/// position first. This is the one tie-break used everywhere a jury is ranked.
std::vector<std::size_t> rank_order(const ScoreVector& scores);

void to_json(nlohmann::json& j, const Juror& juror);
void from_json(const nlohmann::json& j, Juror& juror);

}  // namespace autolaw
