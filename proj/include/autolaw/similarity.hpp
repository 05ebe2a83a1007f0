#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autolaw/backend.hpp"
#include "autolaw/corpus.hpp"

namespace autolaw {

/// Similarity in [0, 1] between two scenarios; symmetric.
class Similarity {
public:
    virtual ~Similarity() = default;
    virtual double text(std::string_view a, std::string_view b) const = 0;
    virtual double scenarios(const Scenario& a, const Scenario& b) const { return text(a.text, b.text); }
};

std::vector<std::string> tokenize(std::string_view text);

/// Cosine over IDF-weighted token sets. Unfitted, every token weighs 1.
/// Identical strings score exactly 1, disjoint token sets exactly 0.
class LexicalSimilarity final : public Similarity {
public:
    LexicalSimilarity() = default;

    /// Smoothed IDF, ln((1 + N) / (1 + df)) + 1, from the given documents.
    void fit(std::span<const std::string> documents);
    double weight(const std::string& token) const;

    double text(std::string_view a, std::string_view b) const override;

private:
    std::map<std::string, double, std::less<>> idf_;
    double unseen_idf_ = 1.0;
};

/// Cosine of embedding vectors mapped from [-1, 1] to [0, 1]. Falls back to
/// the lexical backend, with a warning, when the endpoint is unavailable.
class EmbeddingSimilarity final : public Similarity {
public:
    EmbeddingSimilarity(std::shared_ptr<Embedder> embedder, ModelRef model, LexicalSimilarity fallback = {});

    double text(std::string_view a, std::string_view b) const override;
    bool degraded() const;

private:
    const std::vector<double>* vector_for(std::string_view text) const;

    std::shared_ptr<Embedder> embedder_;
    ModelRef model_;
    LexicalSimilarity fallback_;
    mutable std::mutex mu_;
    mutable std::map<std::string, std::vector<double>, std::less<>> cache_;
    mutable bool degraded_ = false;
};

/// 1 when both scenarios carry the same misconduct tag, else 0. Used by the
/// simulator to isolate voting effects from retrieval quality.
class TagSimilarity final : public Similarity {
public:
    double text(std::string_view a, std::string_view b) const override { return a == b ? 1.0 : 0.0; }
    double scenarios(const Scenario& a, const Scenario& b) const override;
};

/// Untrained lexical similarity of two texts.
double similarity(std::string_view a, std::string_view b);

}  // namespace autolaw
