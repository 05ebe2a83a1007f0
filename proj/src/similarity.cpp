#include "autolaw/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "autolaw/error.hpp"
#include "autolaw/log.hpp"

namespace autolaw {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

void LexicalSimilarity::fit(std::span<const std::string> documents) {
    std::map<std::string, std::size_t, std::less<>> df;
    for (const auto& doc : documents) {
        auto toks = tokenize(doc);
        std::set<std::string> uniq(toks.begin(), toks.end());
        for (const auto& t : uniq) ++df[t];
    }
    const double n = static_cast<double>(documents.size());
    idf_.clear();
    for (const auto& [t, count] : df) idf_[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
    unseen_idf_ = std::log(1.0 + n) + 1.0;
}

double LexicalSimilarity::weight(const std::string& token) const {
    if (idf_.empty()) return 1.0;
    auto it = idf_.find(token);
    return it == idf_.end() ? unseen_idf_ : it->second;
}

double LexicalSimilarity::text(std::string_view a, std::string_view b) const {
    if (a == b) return 1.0;
    const auto ta = tokenize(a), tb = tokenize(b);
    const std::set<std::string> sa(ta.begin(), ta.end()), sb(tb.begin(), tb.end());
    if (sa.empty() || sb.empty()) return 0.0;
    if (sa == sb) return 1.0;

    // Sums run over sorted tokens so both argument orders add in the same order.
    double dot = 0, na = 0, nb = 0;
    for (const auto& t : sa) {
        const double w = weight(t);
        na += w * w;
        if (sb.count(t)) dot += w * w;
    }
    for (const auto& t : sb) {
        const double w = weight(t);
        nb += w * w;
    }
    if (dot == 0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

EmbeddingSimilarity::EmbeddingSimilarity(std::shared_ptr<Embedder> embedder, ModelRef model, LexicalSimilarity fallback)
    : embedder_(std::move(embedder)), model_(std::move(model)), fallback_(std::move(fallback)) {
    if (!embedder_) degraded_ = true;
}

bool EmbeddingSimilarity::degraded() const {
    std::lock_guard lock(mu_);
    return degraded_;
}

const std::vector<double>* EmbeddingSimilarity::vector_for(std::string_view text) const {
    {
        std::lock_guard lock(mu_);
        if (degraded_) return nullptr;
        if (auto it = cache_.find(text); it != cache_.end()) return &it->second;
    }
    try {
        auto vec = embedder_->embed(model_, text);
        std::lock_guard lock(mu_);
        return &cache_.emplace(std::string(text), std::move(vec)).first->second;
    } catch (const EmbeddingBackendUnavailable& e) {
        std::lock_guard lock(mu_);
        if (!degraded_) log::warn(std::string("embedding backend unavailable, using lexical similarity: ") + e.what());
        degraded_ = true;
        return nullptr;
    }
}

double EmbeddingSimilarity::text(std::string_view a, std::string_view b) const {
    if (a == b) return 1.0;
    const auto* va = vector_for(a);
    const auto* vb = va ? vector_for(b) : nullptr;
    if (!va || !vb || va->size() != vb->size()) return fallback_.text(a, b);
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < va->size(); ++i) {
        dot += (*va)[i] * (*vb)[i];
        na += (*va)[i] * (*va)[i];
        nb += (*vb)[i] * (*vb)[i];
    }
    if (na == 0 || nb == 0) return 0.5;
    const double cosine = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
    return (cosine + 1.0) / 2.0;
}

double TagSimilarity::scenarios(const Scenario& a, const Scenario& b) const {
    return a.misconduct_id && b.misconduct_id && *a.misconduct_id == *b.misconduct_id ? 1.0 : 0.0;
}

double similarity(std::string_view a, std::string_view b) { return LexicalSimilarity{}.text(a, b); }

}  // namespace autolaw
