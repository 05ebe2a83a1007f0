#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "autolaw/corpus.hpp"

namespace autolaw {

/// Percentage (0-100) of violation-labeled rows predicted as violations.
/// Throws NoViolationRows; predictions and labels must be the same length.
double detection_rate(std::span<const bool> predictions, std::span<const GroundTruth> labels);

/// F1 of the violation class. Throws SingleClass unless both labels occur.
double f1(std::span<const bool> predictions, std::span<const GroundTruth> labels);

/// Sample standard deviation (divisor n - 1) across pools. Throws TooFewPools.
double pool_stddev(std::span<const double> rates);

/// Rounds half away from zero to two decimals, as rates are reported.
double round2(double x);

struct EvalReport {
    std::string config_id;
    std::string pool_id;
    std::string mode;  ///< "majority_vote" or "autolaw"
    std::size_t k = 0;
    double detection_rate = 0.0;  ///< [0, 100]
    std::optional<double> f1;     ///< only when both classes are present
    std::size_t n = 0;
    double unparseable_rate = 0.0;
    std::map<std::string, double> per_juror_rates;

    bool operator==(const EvalReport&) const = default;
};

nlohmann::ordered_json report_to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

/// Markdown grid: rows Vote-k, columns pool x {MV, Ours}, then one row per
/// juror with its individual detection rate in each pool.
std::string markdown_table(std::span<const EvalReport> reports);

}  // namespace autolaw
