#include "autolaw/datasets.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include "autolaw/error.hpp"
#include "autolaw/rng.hpp"

namespace autolaw {

std::string_view dataset_tag(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::law_sg: return "law-sg";
        case DatasetKind::case_sg: return "case-sg";
        case DatasetKind::unfair_tos: return "unfair-tos";
        case DatasetKind::drop: return "filler";
    }
    return "law-sg";
}

DatasetKind dataset_kind_from_string(std::string_view s) {
    if (s == "law-sg") return DatasetKind::law_sg;
    if (s == "case-sg") return DatasetKind::case_sg;
    if (s == "unfair-tos") return DatasetKind::unfair_tos;
    if (s == "drop" || s == "filler") return DatasetKind::drop;
    throw std::invalid_argument("unknown dataset: " + std::string(s));
}

std::size_t published_size(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::law_sg: return 3150;
        case DatasetKind::case_sg: return 58;
        case DatasetKind::unfair_tos: return 1137;
        case DatasetKind::drop: return 630;
    }
    return 0;
}

std::vector<Record> LoadedDataset::records() const {
    std::vector<Record> out;
    for (const auto& r : regulations) out.emplace_back(r);
    for (const auto& m : misconducts) out.emplace_back(m);
    for (const auto& e : examples) out.emplace_back(e);
    return out;
}

namespace {

GroundTruth label_of(const nlohmann::json& row, GroundTruth fallback) {
    if (!row.contains("label")) return fallback;
    const auto& l = row.at("label");
    if (l.is_number_integer()) return l.get<int>() != 0 ? GroundTruth::violation : GroundTruth::no_violation;
    return ground_truth_from_string(l.get<std::string>());
}

}  // namespace

LoadedDataset load_dataset(const std::filesystem::path& path, DatasetKind kind) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset " + path.string());
    const std::string tag(dataset_tag(kind));

    LoadedDataset out;
    std::map<std::string, std::size_t> regulation_index;
    std::map<std::pair<std::string, std::string>, std::string> misconduct_ids;  // (regulation, text) -> id

    auto regulation_for = [&](const std::string& title) -> const std::string& {
        auto [it, fresh] = regulation_index.emplace(title, out.regulations.size());
        if (fresh) {
            std::string id = kind == DatasetKind::unfair_tos ? "tos-policy"
                                                              : tag + "-r" + std::to_string(out.regulations.size() + 1);
            out.regulations.push_back(Regulation{std::move(id), title, "", std::nullopt, std::nullopt});
        }
        return out.regulations[it->second].id;
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto row = nlohmann::json::parse(line);
            LabeledExample ex;
            ex.dataset_tag = tag;
            ex.scenario.id = row.contains("id") ? row.at("id").get<std::string>()
                                                : tag + "-" + std::to_string(out.examples.size() + 1);
            row.at("scenario").get_to(ex.scenario.text);
            if (ex.scenario.text.empty()) throw std::invalid_argument("empty scenario");

            if (kind == DatasetKind::drop) {
                ex.scenario.kind = ScenarioKind::compliant;
                ex.ground_truth = GroundTruth::no_violation;
                out.examples.push_back(std::move(ex));
                continue;
            }

            ex.ground_truth = label_of(row, GroundTruth::violation);
            ex.scenario.kind = kind == DatasetKind::law_sg ? ScenarioKind::implicit_violation : ScenarioKind::real_world;
            ex.scenario.refinement_round = kind == DatasetKind::law_sg ? row.value("round", 1) : 0;
            const std::string misconduct = row.value("misconduct", "");
            if (ex.ground_truth == GroundTruth::no_violation) {
                ex.scenario.kind = ScenarioKind::compliant;
                ex.scenario.refinement_round = 0;
            } else if (!misconduct.empty() && misconduct != "N/A") {
                const std::string title = kind == DatasetKind::unfair_tos ? "Unfair terms of service"
                                                                          : row.value("regulation", tag + " regulations");
                const auto reg_id = regulation_for(title);
                auto [it, fresh] = misconduct_ids.emplace(std::make_pair(reg_id, misconduct), "");
                if (fresh) {
                    it->second = tag + "-m" + std::to_string(out.misconducts.size() + 1);
                    out.misconducts.push_back(Misconduct{it->second, reg_id, misconduct});
                }
                ex.scenario.misconduct_id = it->second;
            }
            out.examples.push_back(std::move(ex));
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(line_no, e.what());
        } catch (const std::invalid_argument& e) {
            throw MalformedRecord(line_no, e.what());
        }
    }
    return out;
}

std::vector<LabeledExample> balance_with_filler(std::span<const LabeledExample> violations,
                                                std::span<const LabeledExample> filler, std::uint64_t seed) {
    std::vector<LabeledExample> out(violations.begin(), violations.end());
    const std::size_t want = std::min(violations.size(), filler.size());
    auto rng = RngStream::derive(seed, "filler");
    for (auto i : rng.sample_without_replacement(filler.size(), want)) out.push_back(filler[i]);
    return out;
}

std::vector<Regulation> singapore_regulation_catalog() {
    return {
        {"liquor", "The Liquor Control (Supply and Consumption) (Liquor Licensing) Regulations", "", 12, 8},
        {"parking", "Parking Places Rules Regulations", "", 21, 22},
        {"chewing-gum", "Regulation of Imports and Exports (Chewing Gum) Regulations", "", 6, 5},
        {"rts", "Rapid Transit Systems Regulations", "", 24, 31},
        {"smoking", "Smoking (Prohibition in Certain Places) Regulations", "", 27, 5},
    };
}

}  // namespace autolaw
