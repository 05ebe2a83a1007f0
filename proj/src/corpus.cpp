#include "autolaw/corpus.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>

#include "autolaw/error.hpp"

namespace autolaw {

using ojson = nlohmann::ordered_json;

std::string_view to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::explicit_violation: return "explicit";
        case ScenarioKind::implicit_violation: return "implicit";
        case ScenarioKind::real_world: return "real_world";
        case ScenarioKind::compliant: return "compliant";
    }
    return "explicit";
}

ScenarioKind scenario_kind_from_string(std::string_view s) {
    if (s == "explicit") return ScenarioKind::explicit_violation;
    if (s == "implicit") return ScenarioKind::implicit_violation;
    if (s == "real_world") return ScenarioKind::real_world;
    if (s == "compliant") return ScenarioKind::compliant;
    throw SchemaMismatch("unknown scenario kind '" + std::string(s) + "'");
}

std::string_view to_string(GroundTruth truth) {
    return truth == GroundTruth::violation ? "violation" : "no_violation";
}

GroundTruth ground_truth_from_string(std::string_view s) {
    if (s == "violation") return GroundTruth::violation;
    if (s == "no_violation") return GroundTruth::no_violation;
    throw SchemaMismatch("unknown ground truth '" + std::string(s) + "'");
}

std::vector<std::string> JuryMatchedRecord::jury() const {
    const auto n = std::min(jury_size, ranked_jurors.size());
    return {ranked_jurors.begin(), ranked_jurors.begin() + static_cast<std::ptrdiff_t>(n)};
}

JuryMatchedRecord make_matched_record(CaseLawRecord record, ScoreVector scores, std::size_t jury_size) {
    JuryMatchedRecord m;
    m.record = std::move(record);
    for (auto i : rank_order(scores)) m.ranked_jurors.push_back(scores[i].juror_id);
    m.score_vector = std::move(scores);
    m.jury_size = jury_size;
    return m;
}

namespace {

void check_fields(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, std::string_view type) {
    if (!j.is_object()) throw SchemaMismatch(std::string(type) + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw SchemaMismatch("unknown field '" + key + "' in " + std::string(type) + " record (schema_version " +
                                 std::to_string(kSchemaVersion) + ")");
    }
}

template <typename T>
T field(const nlohmann::json& j, const char* name, std::string_view type) {
    if (!j.contains(name)) throw SchemaMismatch("missing field '" + std::string(name) + "' in " + std::string(type));
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch("bad field '" + std::string(name) + "' in " + std::string(type) + ": " + e.what());
    }
}

// --- writers -------------------------------------------------------------

ojson to_ojson(const Regulation& r) {
    ojson j;
    j["id"] = r.id;
    j["title"] = r.title;
    j["body"] = r.body;
    if (r.pages) j["pages"] = *r.pages;
    if (r.declared_misconducts) j["declared_misconducts"] = *r.declared_misconducts;
    return j;
}

ojson to_ojson(const Misconduct& m) {
    ojson j;
    j["id"] = m.id;
    j["regulation_id"] = m.regulation_id;
    j["description"] = m.description;
    return j;
}

ojson to_ojson(const Scenario& s) {
    ojson j;
    j["id"] = s.id;
    j["text"] = s.text;
    if (s.misconduct_id) j["misconduct_id"] = *s.misconduct_id;
    j["kind"] = to_string(s.kind);
    j["refinement_round"] = s.refinement_round;
    return j;
}

ojson to_ojson(const CaseLawRecord& c) {
    ojson j;
    j["scenario"] = to_ojson(c.scenario);
    j["misconduct"] = to_ojson(c.misconduct);
    j["regulation"] = to_ojson(c.regulation);
    return j;
}

ojson to_ojson(const JuryMatchedRecord& m) {
    ojson j;
    j["record"] = to_ojson(m.record);
    ojson scores = ojson::array();
    for (const auto& e : m.score_vector) {
        ojson s;
        s["juror_id"] = e.juror_id;
        s["score"] = e.score;
        scores.push_back(std::move(s));
    }
    j["score_vector"] = std::move(scores);
    j["ranked_jurors"] = m.ranked_jurors;
    j["jury_size"] = m.jury_size;
    return j;
}

ojson to_ojson(const LabeledExample& e) {
    ojson j;
    j["scenario"] = to_ojson(e.scenario);
    j["ground_truth"] = to_string(e.ground_truth);
    j["dataset_tag"] = e.dataset_tag;
    return j;
}

ojson to_ojson(const Juror& juror) {
    ojson j;
    j["id"] = juror.id;
    j["role"] = to_string(juror.role);
    ojson model;
    model["provider_id"] = juror.model.provider_id;
    model["model_name"] = juror.model.model_name;
    ojson decode;
    decode["temperature"] = juror.model.decode.temperature;
    decode["max_tokens"] = juror.model.decode.max_tokens;
    if (juror.model.decode.seed) decode["seed"] = *juror.model.decode.seed;
    model["decode"] = std::move(decode);
    j["model"] = std::move(model);
    j["fine_tuned"] = juror.fine_tuned;
    return j;
}

// --- readers -------------------------------------------------------------

Regulation regulation_from(const nlohmann::json& j) {
    check_fields(j, {"schema_version", "type", "id", "title", "body", "pages", "declared_misconducts"}, "regulation");
    Regulation r;
    r.id = field<std::string>(j, "id", "regulation");
    r.title = field<std::string>(j, "title", "regulation");
    r.body = j.contains("body") ? field<std::string>(j, "body", "regulation") : std::string{};
    if (j.contains("pages")) r.pages = field<int>(j, "pages", "regulation");
    if (j.contains("declared_misconducts")) r.declared_misconducts = field<int>(j, "declared_misconducts", "regulation");
    return r;
}

Misconduct misconduct_from(const nlohmann::json& j) {
    check_fields(j, {"schema_version", "type", "id", "regulation_id", "description"}, "misconduct");
    return Misconduct{field<std::string>(j, "id", "misconduct"), field<std::string>(j, "regulation_id", "misconduct"),
                      field<std::string>(j, "description", "misconduct")};
}

Scenario scenario_from(const nlohmann::json& j) {
    check_fields(j, {"schema_version", "type", "id", "text", "misconduct_id", "kind", "refinement_round"}, "scenario");
    Scenario s;
    s.id = field<std::string>(j, "id", "scenario");
    s.text = field<std::string>(j, "text", "scenario");
    if (j.contains("misconduct_id") && !j.at("misconduct_id").is_null())
        s.misconduct_id = field<std::string>(j, "misconduct_id", "scenario");
    s.kind = scenario_kind_from_string(field<std::string>(j, "kind", "scenario"));
    s.refinement_round = j.contains("refinement_round") ? field<int>(j, "refinement_round", "scenario") : 0;
    return s;
}

CaseLawRecord case_law_from(const nlohmann::json& j) {
    check_fields(j, {"schema_version", "type", "scenario", "misconduct", "regulation"}, "case_law");
    if (!j.contains("scenario") || !j.contains("misconduct") || !j.contains("regulation"))
        throw SchemaMismatch("case_law requires scenario, misconduct and regulation");
    return CaseLawRecord{scenario_from(j.at("scenario")), misconduct_from(j.at("misconduct")),
                         regulation_from(j.at("regulation"))};
}

JuryMatchedRecord matched_from(const nlohmann::json& j) {
    check_fields(j, {"schema_version", "type", "record", "score_vector", "ranked_jurors", "jury_size"}, "jury_matched");
    if (!j.contains("record")) throw SchemaMismatch("jury_matched requires record");
    JuryMatchedRecord m;
    m.record = case_law_from(j.at("record"));
    for (const auto& e : field<nlohmann::json>(j, "score_vector", "jury_matched")) {
        check_fields(e, {"juror_id", "score"}, "score entry");
        m.score_vector.push_back({field<std::string>(e, "juror_id", "score entry"), field<double>(e, "score", "score entry")});
    }
    m.ranked_jurors = field<std::vector<std::string>>(j, "ranked_jurors", "jury_matched");
    m.jury_size = field<std::size_t>(j, "jury_size", "jury_matched");
    return m;
}

LabeledExample labeled_from(const nlohmann::json& j) {
    check_fields(j, {"schema_version", "type", "scenario", "ground_truth", "dataset_tag"}, "labeled_example");
    if (!j.contains("scenario")) throw SchemaMismatch("labeled_example requires scenario");
    return LabeledExample{scenario_from(j.at("scenario")),
                          ground_truth_from_string(field<std::string>(j, "ground_truth", "labeled_example")),
                          field<std::string>(j, "dataset_tag", "labeled_example")};
}

Juror juror_from(const nlohmann::json& j) {
    check_fields(j, {"schema_version", "type", "id", "role", "model", "fine_tuned"}, "juror");
    try {
        return j.get<Juror>();
    } catch (const std::exception& e) {
        throw SchemaMismatch(std::string("bad juror record: ") + e.what());
    }
}

bool ranking_consistent(const JuryMatchedRecord& m) {
    if (m.ranked_jurors.size() != m.score_vector.size()) return false;
    const auto order = rank_order(m.score_vector);
    for (std::size_t i = 0; i < order.size(); ++i)
        if (m.score_vector[order[i]].juror_id != m.ranked_jurors[i]) return false;
    return true;
}

class LockFile {
public:
    explicit LockFile(const std::filesystem::path& target) : path_(target.string() + ".lock") {
        if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) throw StoreLocked("store is locked by another writer: " + path_.string());
    }
    ~LockFile() {
        ::close(fd_);
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    std::filesystem::path path_;
    int fd_ = -1;
};

}  // namespace

std::string_view record_type_name(const Record& record) {
    struct Visitor {
        std::string_view operator()(const Regulation&) const { return "regulation"; }
        std::string_view operator()(const Misconduct&) const { return "misconduct"; }
        std::string_view operator()(const Scenario&) const { return "scenario"; }
        std::string_view operator()(const CaseLawRecord&) const { return "case_law"; }
        std::string_view operator()(const JuryMatchedRecord&) const { return "jury_matched"; }
        std::string_view operator()(const LabeledExample&) const { return "labeled_example"; }
        std::string_view operator()(const Juror&) const { return "juror"; }
    };
    return std::visit(Visitor{}, record);
}

nlohmann::ordered_json record_to_json(const Record& record) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = record_type_name(record);
    ojson body = std::visit([](const auto& r) { return to_ojson(r); }, record);
    for (auto& [k, v] : body.items()) j[k] = v;
    return j;
}

Record record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaMismatch("record must be a JSON object");
    if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer())
        throw SchemaMismatch("record has no integer schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion)
        throw SchemaMismatch("record schema_version " + std::to_string(version) + " is not supported (reader is version " +
                             std::to_string(kSchemaVersion) + ")");
    const auto type = field<std::string>(j, "type", "record");
    if (type == "regulation") return regulation_from(j);
    if (type == "misconduct") return misconduct_from(j);
    if (type == "scenario") return scenario_from(j);
    if (type == "case_law") return case_law_from(j);
    if (type == "jury_matched") return matched_from(j);
    if (type == "labeled_example") return labeled_from(j);
    if (type == "juror") return juror_from(j);
    throw SchemaMismatch("unknown record type '" + type + "'");
}

void save_store(const std::filesystem::path& path, std::span<const Record> records) {
    LockFile lock(path);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot write store " + tmp.string());
        for (const auto& r : records) out << record_to_json(r).dump() << '\n';
        out.flush();
        if (!out) throw Error("write failed for store " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void append_store(const std::filesystem::path& path, std::span<const Record> records) {
    LockFile lock(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot append to store " + path.string());
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
    out.flush();
}

std::vector<Record> load_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open store " + path.string());
    std::vector<Record> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const bool terminated = !in.eof();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(lineno, terminated ? e.what() : "truncated final line");
        }
        Record r = [&] {
            try {
                return record_from_json(j);
            } catch (const SchemaMismatch& e) {
                throw SchemaMismatch(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }();
        if (const auto* m = std::get_if<JuryMatchedRecord>(&r); m && !ranking_consistent(*m))
            throw MalformedRecord(lineno, "ranked_jurors does not match the score-derived ranking");
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

void check_scenario(const Scenario& s, std::size_t idx, std::vector<IntegrityViolation>& out) {
    if (s.kind == ScenarioKind::implicit_violation && s.refinement_round < 1)
        out.push_back({idx, "implicit scenario " + s.id + " has refinement_round < 1"});
    if (s.kind == ScenarioKind::compliant && s.misconduct_id)
        out.push_back({idx, "compliant scenario " + s.id + " carries misconduct " + *s.misconduct_id});
    if (s.refinement_round < 0) out.push_back({idx, "scenario " + s.id + " has negative refinement_round"});
}

void check_case_law(const CaseLawRecord& c, std::size_t idx, std::vector<IntegrityViolation>& out) {
    check_scenario(c.scenario, idx, out);
    if (c.scenario.misconduct_id != c.misconduct.id)
        out.push_back({idx, "case law scenario " + c.scenario.id + " does not reference misconduct " + c.misconduct.id});
    if (c.misconduct.regulation_id != c.regulation.id)
        out.push_back({idx, "case law misconduct " + c.misconduct.id + " references regulation " +
                                c.misconduct.regulation_id + " but record holds " + c.regulation.id});
}

}  // namespace

std::vector<IntegrityViolation> validate_referential_integrity(std::span<const Record> records) {
    std::vector<IntegrityViolation> out;
    std::set<std::string> regulation_ids, misconduct_ids, juror_ids;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (const auto* r = std::get_if<Regulation>(&records[i])) {
            if (!regulation_ids.insert(r->id).second) out.push_back({i, "duplicate regulation id " + r->id});
            if (r->title.empty()) out.push_back({i, "regulation " + r->id + " has an empty title"});
        } else if (const auto* m = std::get_if<Misconduct>(&records[i])) {
            if (!misconduct_ids.insert(m->id).second) out.push_back({i, "duplicate misconduct id " + m->id});
        } else if (const auto* j = std::get_if<Juror>(&records[i])) {
            if (!juror_ids.insert(j->id).second) out.push_back({i, "duplicate juror id " + j->id});
        }
    }

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (const auto* m = std::get_if<Misconduct>(&rec)) {
            if (!regulation_ids.count(m->regulation_id))
                out.push_back({i, "misconduct " + m->id + " references missing regulation " + m->regulation_id});
            if (m->description.empty()) out.push_back({i, "misconduct " + m->id + " has an empty description"});
        } else if (const auto* s = std::get_if<Scenario>(&rec)) {
            check_scenario(*s, i, out);
            if (s->misconduct_id && !misconduct_ids.count(*s->misconduct_id))
                out.push_back({i, "scenario " + s->id + " references missing misconduct " + *s->misconduct_id});
        } else if (const auto* c = std::get_if<CaseLawRecord>(&rec)) {
            check_case_law(*c, i, out);
        } else if (const auto* jm = std::get_if<JuryMatchedRecord>(&rec)) {
            check_case_law(jm->record, i, out);
            std::multiset<std::string> a(jm->ranked_jurors.begin(), jm->ranked_jurors.end()), b;
            for (const auto& e : jm->score_vector) {
                b.insert(e.juror_id);
                if (!(e.score >= 0.0 && e.score <= 1.0))
                    out.push_back({i, "score for juror " + e.juror_id + " outside [0,1]"});
            }
            if (a != b) {
                out.push_back({i, "ranked_jurors of " + jm->record.scenario.id + " is not a permutation of its scores"});
            } else if (!ranking_consistent(*jm)) {
                out.push_back({i, "ranked_jurors of " + jm->record.scenario.id + " disagrees with its scores"});
            }
            if (jm->jury_size < 1 || jm->jury_size > jm->ranked_jurors.size())
                out.push_back({i, "jury_size of " + jm->record.scenario.id + " outside [1, pool size]"});
        } else if (const auto* e = std::get_if<LabeledExample>(&rec)) {
            check_scenario(e->scenario, i, out);
            if (e->dataset_tag.empty()) out.push_back({i, "labeled example " + e->scenario.id + " has no dataset_tag"});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    return out;
}

}  // namespace autolaw
