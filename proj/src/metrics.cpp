#include "autolaw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "autolaw/error.hpp"

namespace autolaw {

namespace {
void check_lengths(std::span<const bool> p, std::span<const GroundTruth> l) {
    if (p.size() != l.size()) throw std::invalid_argument("predictions and labels differ in length");
}
}  // namespace

double detection_rate(std::span<const bool> predictions, std::span<const GroundTruth> labels) {
    check_lengths(predictions, labels);
    std::size_t positives = 0, detected = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != GroundTruth::violation) continue;
        ++positives;
        detected += predictions[i] ? 1 : 0;
    }
    if (positives == 0) throw NoViolationRows("detection rate needs at least one violation row");
    return 100.0 * static_cast<double>(detected) / static_cast<double>(positives);
}

double f1(std::span<const bool> predictions, std::span<const GroundTruth> labels) {
    check_lengths(predictions, labels);
    std::size_t tp = 0, fp = 0, fn = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool actual = labels[i] == GroundTruth::violation;
        (actual ? pos : neg)++;
        if (predictions[i] && actual) ++tp;
        if (predictions[i] && !actual) ++fp;
        if (!predictions[i] && actual) ++fn;
    }
    if (pos == 0 || neg == 0) throw SingleClass("F1 needs both violation and no_violation rows");
    if (tp == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

double pool_stddev(std::span<const double> rates) {
    if (rates.size() < 2) throw TooFewPools("standard deviation across pools needs at least two rates");
    double mean = 0;
    for (double r : rates) mean += r;
    mean /= static_cast<double>(rates.size());
    double ss = 0;
    for (double r : rates) ss += (r - mean) * (r - mean);
    return std::sqrt(ss / static_cast<double>(rates.size() - 1));
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

nlohmann::ordered_json report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["config_id"] = r.config_id;
    j["pool_id"] = r.pool_id;
    j["mode"] = r.mode;
    j["k"] = r.k;
    j["detection_rate"] = round2(r.detection_rate);
    j["f1"] = r.f1 ? nlohmann::ordered_json(std::round(*r.f1 * 10000.0) / 10000.0) : nlohmann::ordered_json();
    j["n"] = r.n;
    j["unparseable_rate"] = std::round(r.unparseable_rate * 10000.0) / 10000.0;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (const auto& [id, rate] : r.per_juror_rates) per[id] = round2(rate);
    j["per_juror_rates"] = std::move(per);
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    j.at("config_id").get_to(r.config_id);
    r.pool_id = j.value("pool_id", "");
    r.mode = j.value("mode", "");
    r.k = j.value("k", std::size_t{0});
    j.at("detection_rate").get_to(r.detection_rate);
    if (j.contains("f1") && !j.at("f1").is_null()) r.f1 = j.at("f1").get<double>();
    j.at("n").get_to(r.n);
    r.unparseable_rate = j.value("unparseable_rate", 0.0);
    if (j.contains("per_juror_rates")) r.per_juror_rates = j.at("per_juror_rates").get<std::map<std::string, double>>();
    return r;
}

namespace {

std::string fmt2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", round2(x));
    return buf;
}

}  // namespace

std::string markdown_table(std::span<const EvalReport> reports) {
    std::vector<std::string> pools;
    std::set<std::size_t> ks;
    for (const auto& r : reports) {
        if (std::find(pools.begin(), pools.end(), r.pool_id) == pools.end()) pools.push_back(r.pool_id);
        ks.insert(r.k);
    }
    auto find = [&](const std::string& pool, const std::string& mode, std::size_t k) -> const EvalReport* {
        for (const auto& r : reports)
            if (r.pool_id == pool && r.mode == mode && r.k == k) return &r;
        return nullptr;
    };

    std::string out = "| Settings |";
    for (const auto& p : pools) out += " " + p + " MV | " + p + " Ours |";
    out += "\n|---|";
    for (std::size_t i = 0; i < pools.size(); ++i) out += "---|---|";
    out += "\n";
    for (auto k : ks) {
        out += "| Vote-" + std::to_string(k) + " |";
        for (const auto& p : pools) {
            const auto* mv = find(p, "majority_vote", k);
            const auto* ours = find(p, "autolaw", k);
            out += " " + (mv ? fmt2(mv->detection_rate) : std::string("-")) + " |";
            out += " " + (ours ? fmt2(ours->detection_rate) : std::string("-")) + " |";
        }
        out += "\n";
    }

    // Individual juror rates come from the majority-vote runs, which poll every juror.
    std::map<std::string, std::map<std::string, double>> jurors_by_pool;
    std::size_t max_jurors = 0;
    for (const auto& p : pools) {
        for (const auto& r : reports) {
            if (r.pool_id == p && r.mode == "majority_vote" && !r.per_juror_rates.empty()) {
                jurors_by_pool[p] = r.per_juror_rates;
                break;
            }
        }
        max_jurors = std::max(max_jurors, jurors_by_pool[p].size());
    }
    for (std::size_t i = 0; i < max_jurors; ++i) {
        out += "| J" + std::to_string(i + 1) + " |";
        for (const auto& p : pools) {
            const auto& rates = jurors_by_pool[p];
            if (i < rates.size()) {
                auto it = std::next(rates.begin(), static_cast<std::ptrdiff_t>(i));
                out += " " + fmt2(it->second) + " (" + it->first + ") | |";
            } else {
                out += " - | |";
            }
        }
        out += "\n";
    }
    return out;
}

}  // namespace autolaw
