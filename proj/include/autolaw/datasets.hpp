#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autolaw/corpus.hpp"

namespace autolaw {

/// Evaluation datasets with a known raw layout. Raw rows are JSON Lines:
/// {"scenario": text, "misconduct": text, optional "id", "regulation",
/// "label" ("violation"/"no_violation" or 1/0)}.
enum class DatasetKind { law_sg, case_sg, unfair_tos, drop };

std::string_view dataset_tag(DatasetKind kind);  ///< "law-sg", "case-sg", "unfair-tos", "filler"
DatasetKind dataset_kind_from_string(std::string_view s);

/// Row count of the full published dataset, for sanity checks on user data.
std::size_t published_size(DatasetKind kind);

struct LoadedDataset {
    std::vector<Regulation> regulations;
    std::vector<Misconduct> misconducts;
    std::vector<LabeledExample> examples;

    /// Everything as store records, regulations first.
    std::vector<Record> records() const;
};

/// Reads raw rows. Law-SG rows become implicit violations, Case-SG and
/// Unfair-TOS rows real-world ones, DROP rows compliant filler. Misconduct
/// texts are deduplicated into Misconduct records; Unfair-TOS clauses belong
/// to a single "tos-policy" regulation. Throws MalformedRecord(line).
LoadedDataset load_dataset(const std::filesystem::path& path, DatasetKind kind);

/// Adds as many filler negatives as there are violation rows, sampled
/// without replacement under the seed (all of them when there are fewer).
std::vector<LabeledExample> balance_with_filler(std::span<const LabeledExample> violations,
                                                std::span<const LabeledExample> filler, std::uint64_t seed);

/// Metadata of the five Singapore regulations (title, pages, misconduct
/// count); bodies are empty.
std::vector<Regulation> singapore_regulation_catalog();

}  // namespace autolaw
