#include "autolaw/jury.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace autolaw {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::Judge: return "Judge";
        case Role::Lawyer: return "Lawyer";
        case Role::Prosecutor: return "Prosecutor";
    }
    return "Judge";
}

Role role_from_string(std::string_view s) {
    if (s == "Judge") return Role::Judge;
    if (s == "Lawyer") return Role::Lawyer;
    if (s == "Prosecutor") return Role::Prosecutor;
    throw std::invalid_argument("unknown legal role: " + std::string(s));
}

std::string display_name(const Juror& juror) {
    return "(" + std::string(to_string(juror.role)) + ", " + juror.model.model_name + (juror.fine_tuned ? "*" : "") + ")";
}

void JuryPool::validate() const {
    if (jurors.empty()) throw std::invalid_argument("jury pool must have at least one juror");
    std::set<std::string_view> ids;
    for (const auto& j : jurors) {
        if (j.id.empty()) throw std::invalid_argument("juror id must be non-empty");
        if (!ids.insert(j.id).second) throw std::invalid_argument("duplicate juror id in pool: " + j.id);
    }
}

std::size_t JuryPool::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < jurors.size(); ++i)
        if (jurors[i].id == id) return i;
    throw std::out_of_range("juror not in pool: " + std::string(id));
}

const Juror& JuryPool::find(std::string_view id) const { return jurors[index_of(id)]; }

std::vector<std::size_t> rank_order(const ScoreVector& scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a].score > scores[b].score; });
    return idx;
}

void to_json(nlohmann::json& j, const Juror& juror) {
    j = nlohmann::json{{"id", juror.id},
                       {"role", to_string(juror.role)},
                       {"model", juror.model},
                       {"fine_tuned", juror.fine_tuned}};
}

void from_json(const nlohmann::json& j, Juror& juror) {
    j.at("id").get_to(juror.id);
    juror.role = role_from_string(j.at("role").get<std::string>());
    j.at("model").get_to(juror.model);
    juror.fine_tuned = j.value("fine_tuned", false);
}

}  // namespace autolaw
